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

#ifndef LCSCTL_CERTIFICATE_HPP
#define LCSCTL_CERTIFICATE_HPP

#include <vector>

#include "lcsctl/common.hpp"
#include "lcsctl/lcs_model.hpp"

namespace lcsctl {

/// Piecewise-quadratic Lyapunov certificate
///   V(x, lam) = x'P x + 2 x'Q lam + lam'R lam.
struct PwqCertificate {
  Matrix P;  // n x n symmetric
  Matrix Q;  // n x m
  Matrix R;  // m x m symmetric

  int n() const { return static_cast<int>(P.rows()); }
  int m() const { return static_cast<int>(Q.cols()); }

  /// Checks symmetry of P and R and mutual dimension consistency,
  /// optionally against a companion model.
  void validate(const LcsModel* model = nullptr, double sym_tol = 1e-9) const;
};

/// Quadratic form of the Lyapunov derivative in z = [x; lam; lambar]:
///   Vdot(x) = z'N z.
struct NMatrix {
  Matrix N;  // (n + 2m) x (n + 2m) symmetric
  int n = 0;
  int m = 0;

  Matrix n11() const { return N.block(0, 0, n, n); }
  Matrix n12() const { return N.block(0, n, n, m); }
  Matrix n22() const { return N.block(n, n, m, m); }
};

/// V(x, lam) as a scalar.
double eval_v(const PwqCertificate& cert, const Vector& x,
              const Vector& lambda);

/// N with blocks
///   N11 = (A+BK)'P + P(A+BK),
///   N12 = P(BL+D) + (A+BK)'Q,
///   N22 = (BL+D)'Q + Q'(BL+D),
///   N13 = Q, N23 = R, N33 = 0.
NMatrix build_n(const LcsModel& model, const Controller& ctrl,
                const PwqCertificate& cert);

/// Directional derivative of t -> V(x(t), lam(x(t))) along the closed-loop
/// flow, evaluated as z'Nz with lam = lam(x), lambar the directional
/// derivative of lam along xdot.
double eval_vdot(const LcsModel& model, const Controller& ctrl,
                 const PwqCertificate& cert, const Vector& x);

struct WitnessPoint {
  Vector x;
  double v = 0.0;
  double vdot = 0.0;
  bool violates_pos = false;
  bool violates_dec = false;
};

struct VerificationReport {
  int samples = 0;
  int violations_pos = 0;
  int violations_dec = 0;
  double worst_pos_margin = 0.0;  // min over samples of V - eps_pos |x|^2
  double worst_dec_margin = 0.0;  // min over samples of -Vdot - eps_dec |x|^2
  std::vector<WitnessPoint> witness_points;

  bool clean() const { return violations_pos == 0 && violations_dec == 0; }
};

inline constexpr double kDefaultEpsPos = 1e-6;
inline constexpr double kDefaultEpsDec = 1e-6;

/// Samples x uniformly in the ball |x|_2 <= omega and checks the scale-free
/// margins V >= eps_pos |x|^2 and Vdot <= -eps_dec |x|^2. Violations are
/// reported as data, never thrown.
VerificationReport verify_sampled(const LcsModel& model, const Controller& ctrl,
                                  const PwqCertificate& cert, double omega,
                                  int n_samples, uint64_t seed,
                                  double eps_pos = kDefaultEpsPos,
                                  double eps_dec = kDefaultEpsDec);

/// Max over consecutive samples of V(x_{i+1}, lam_{i+1}) - V(x_i, lam_i).
double monotonicity_along_trajectory(const Trajectory& traj,
                                     const PwqCertificate& cert,
                                     const LcsModel& model);

}  // namespace lcsctl

#endif  // LCSCTL_CERTIFICATE_HPP
