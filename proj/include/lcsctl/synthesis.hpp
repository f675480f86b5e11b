/*
 Copyright 2026 The lcsctl authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef LCSCTL_SYNTHESIS_HPP
#define LCSCTL_SYNTHESIS_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "lcsctl/certificate.hpp"
#include "lcsctl/common.hpp"
#include "lcsctl/lcs_model.hpp"
#include "lcsctl/sdp.hpp"

namespace lcsctl {

enum class GammaRepresentation { Gamma1, Gamma2 };
enum class SynthesisStatus { Feasible, Infeasible, Stalled };

/// Start the alternation from an LQR gain (empty weights mean identity).
struct LqrInit {
  Matrix Qw;
  Matrix Rw;
};
/// Start from K = 0, L = 0.
struct ZeroInit {};
/// Start from user-provided gains.
struct GivenInit {
  Matrix K;
  Matrix L;
};
using InitStrategy = std::variant<LqrInit, ZeroInit, GivenInit>;

struct SynthesisOptions {
  GammaRepresentation representation = GammaRepresentation::Gamma2;
  double omega = 1.0;     // domain radius, D = {|x|_2 <= omega}
  double theta_k = 50.0;  // singular value cap on K
  double theta_l = 50.0;  // singular value cap on L
  double eps_pos = 1e-4;
  double eps_dec = 1e-4;
  int max_alternations = 25;
  InitStrategy init = LqrInit{};
  std::optional<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>>
      sparsity_mask;
  double cert_scale_cap = 1e3;  // [P Q; Q' R] <= cap * I
  SdpOptions sdp;
  bool verbose = false;

  void validate() const;
};

/// Constants derived from the model that parameterize the relaxations.
struct DerivedBounds {
  double gamma = 0.0;  // Lipschitz bound |lam(x)| <= gamma |x| (c >= 0)
  double kappa = 0.0;  // |lambar| <= kappa |x| under the gain caps (c = 0)
  double sigma = 0.0;  // lam'lam <= sigma x'x + d, certified
  double d = 0.0;
  double b = 0.0;      // ball radius on the Gamma'(2) equality residual
};

/// Assembled feasibility program: the model, the chosen representation, the
/// derived relaxation constants, and the variable/block bookkeeping the
/// alternating solver instantiates into concrete SDPs.
struct BmiProgram {
  LcsModel model;
  SynthesisOptions opts;
  DerivedBounds bounds;
  bool eb_zero = true;  // E*B == 0 makes the Gamma'(2) residual exact

  int num_p_vars = 0;  // n(n+1)/2
  int num_q_vars = 0;  // n*m
  int num_r_vars = 0;  // m(m+1)/2
  int num_k_vars = 0;  // k*n minus masked entries
  int num_l_vars = 0;  // k*m
  int num_pos_multipliers = 0;
  int num_dec_multipliers = 0;
  int pos_block_dim = 0;  // n + m
  int dec_block_dim = 0;  // n + 2m (Gamma1) or n + 3m (Gamma2)
};

struct SynthesisResult {
  Controller controller;
  PwqCertificate certificate;
  std::map<std::string, double> multipliers;
  double margin_pos = 0.0;
  double margin_dec = 0.0;
  SynthesisStatus status = SynthesisStatus::Infeasible;
  int iterations = 0;
  double wall_time = 0.0;
  DerivedBounds bounds;
  std::string message;
};

/// gamma = max over nonempty supports alpha of |F_aa^{-1} E_a|_2.
/// Exact enumeration; m <= 12.
double gamma_bound(const Matrix& E, const Matrix& F);

/// kappa = gamma (|A+BK| + gamma |D+BL|) with the norms replaced by caps.
double kappa_bound(double gamma, double norm_closed_A, double norm_closed_D);

/// Multiplier-certified (sigma, d) with lam'lam <= sigma x'x + d on
/// Gamma_SOL(E, F, c), minimizing sigma first and then d.
std::pair<double, double> sigma_d_bound(const Matrix& E, const Matrix& F,
                                        const Vector& c);

/// b = theta_EBK * omega + theta_EBL * sqrt(sigma_eff * omega^2 + d) where
/// sigma_eff falls back to gamma^2 when sigma is negative (not certified).
double b_bound(double theta_EBK, double theta_EBL, double gamma, double sigma,
               double d, double omega);

/// Validates the model for synthesis (c >= 0, F P-matrix), computes the
/// derived bounds, and records the variable/block layout.
BmiProgram assemble_bmi(const LcsModel& model, const SynthesisOptions& opts);

/// Alternating SDP heuristic: (i) fix gains, maximize the decrease margin
/// over certificate and multipliers; (ii) fix the certificate, maximize the
/// same margin over gains and multipliers. The margin is nondecreasing
/// across alternations; no global guarantee.
SynthesisResult solve_alternating(const BmiProgram& bmi);

const char* to_string(SynthesisStatus status);
const char* to_string(GammaRepresentation repr);

}  // namespace lcsctl

#endif  // LCSCTL_SYNTHESIS_HPP
