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

#ifndef LCSCTL_LCS_MODEL_HPP
#define LCSCTL_LCS_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "lcsctl/common.hpp"
#include "lcsctl/lcp.hpp"

namespace lcsctl {

/// Linear complementarity system
///   xdot = A x + B u + D lam,
///   0 <= lam  ⊥  E x + F lam + c >= 0.
struct LcsModel {
  Matrix A;  // n x n
  Matrix B;  // n x k
  Matrix D;  // n x m
  Matrix E;  // m x n
  Matrix F;  // m x m
  Vector c;  // m
  std::vector<std::string> names;  // optional state labels, empty or size n

  int n() const { return static_cast<int>(A.rows()); }
  int k() const { return static_cast<int>(B.cols()); }
  int m() const { return static_cast<int>(D.cols()); }

  /// Checks dimension consistency and that F is a P-matrix. When
  /// require_c_nonneg is true a negative entry of c throws, otherwise it is
  /// reported through the optional warning sink (synthesis requires c >= 0,
  /// simulation does not).
  void validate(bool require_c_nonneg = false,
                std::string* warning = nullptr) const;

  /// Contact force lam(x), the unique solution of LCP(E x + c, F).
  Vector contact_force_at(const Vector& x) const;
};

/// Static contact-aware feedback u = K x + L lam.
struct Controller {
  Matrix K;  // k x n
  Matrix L;  // k x m
  std::optional<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> mask;

  /// Zeroes every masked entry of K. No-op without a mask.
  void apply_mask();

  /// True when every masked entry of K is exactly zero.
  bool mask_respected() const;
};

/// Sampled closed-loop rollout. All sequences share the same length and the
/// i-th entries belong to times[i].
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> forces;
  std::vector<Vector> inputs;
  std::vector<double> comp_residuals;
  bool diverged = false;

  std::size_t size() const { return times.size(); }
  const Vector& terminal_state() const { return states.back(); }
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDivergenceGuard = 1e6;
inline constexpr double kEquilibriumTol = 1e-9;

/// u = K x + L lam.
Vector control_input(const Controller& ctrl, const Vector& x,
                     const Vector& lambda);

/// xdot = (A + B K) x + (D + B L) lam(x).
Vector closed_loop_rhs(const LcsModel& model, const Controller& ctrl,
                       const Vector& x);

/// Fixed-step RK4; each stage resolves the contact LCP once. Integration
/// stops early and sets Trajectory::diverged when the state leaves the
/// |x|_inf <= 1e6 box or turns non-finite.
Trajectory simulate(const LcsModel& model, const Controller& ctrl,
                    const Vector& x0, double t_final, double h = kDefaultStep);

/// True iff closed_loop_rhs at the origin vanishes to tolerance.
bool equilibrium_check(const LcsModel& model, const Controller& ctrl,
                       double tol = kEquilibriumTol);

}  // namespace lcsctl

#endif  // LCSCTL_LCS_MODEL_HPP
