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

#ifndef LCSCTL_LCP_HPP
#define LCSCTL_LCP_HPP

#include <vector>

#include "lcsctl/common.hpp"

namespace lcsctl {

/// LCP(w, F): find lambda with 0 <= lambda  ⊥  F*lambda + w >= 0.
struct LcpInstance {
  Matrix F;
  Vector w;

  int size() const { return static_cast<int>(w.size()); }
  void validate() const;
};

enum class LcpStatus { Solved, Ray, MaxPivots };

struct LcpSolution {
  Vector lambda;
  Vector slack;  // F*lambda + w
  LcpStatus status = LcpStatus::Solved;
};

/// Partition of contact indices at a point on the solution graph:
/// alpha active (force > 0, slack = 0), beta degenerate (both zero),
/// gamma inactive (slack > 0). Zero-based indices.
struct IndexSets {
  std::vector<int> alpha;
  std::vector<int> beta;
  std::vector<int> gamma;
  double tie_tol = 1e-9;
};

constexpr double kDefaultLcpTol = 1e-10;
constexpr int kDefaultMaxPivots = 1000;
constexpr double kDefaultTieTol = 1e-9;

/// Lemke's complementary pivoting with a covering vector of ones and
/// Bland-style tie-breaking. Always solves when F is a P-matrix.
LcpSolution solve_lemke(const LcpInstance& inst, double tol = kDefaultLcpTol,
                        int max_pivots = kDefaultMaxPivots);

/// Brute-force reference: tries all 2^m supports, returns every solution.
/// Guarded to m <= 12.
std::vector<LcpSolution> solve_enumerate(const LcpInstance& inst);

/// Exhaustive principal-minor test, m <= 20. Strict positivity.
bool is_p_matrix(const Matrix& F);

/// The contact force map lambda(x): unique solution of LCP(Ex + c, F).
Vector contact_force(const Matrix& E, const Matrix& F, const Vector& c,
                     const Vector& x);

/// Classify contacts at (x, lambda); lambda must solve the LCP at x.
IndexSets index_sets(const Matrix& E, const Matrix& F, const Vector& c,
                     const Vector& x, const Vector& lambda,
                     double tie_tol = kDefaultTieTol);

/// Directional derivative lambda'(x; d) of the contact force. Solved as a
/// reduced LCP over the beta block with the alpha block held at equality.
Vector directional_derivative(const Matrix& E, const Matrix& F,
                              const Vector& c, const Vector& x,
                              const Vector& d);

}  // namespace lcsctl

#endif  // LCSCTL_LCP_HPP
