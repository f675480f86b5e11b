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

#ifndef LCSCTL_SDP_HPP
#define LCSCTL_SDP_HPP

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lcsctl/common.hpp"

namespace lcsctl {

/// Dense SDP in inequality form over decision variables y:
///   maximize  b'y
///   s.t.      G_j(y) = G_j0 + sum_i y_i G_ji  is PSD   for every block j,
///             scalar inequalities g0 + a'y >= 0 (stored as 1x1 blocks),
///             affine equalities   a'y = r (eliminated before the solve).
/// Solved by an infeasible-start primal-dual path-following method with
/// Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
class SdpProblem {
 public:
  explicit SdpProblem(int num_vars = 0);

  int num_vars() const { return num_vars_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

  /// Appends a decision variable and returns its index.
  int add_var(double objective_coeff = 0.0);

  /// Sets the full objective vector (maximize b'y).
  void set_objective(const Vector& b);
  void set_objective_coeff(int var, double coeff);

  /// Appends an empty PSD block of the given size and returns its index.
  int add_block(int size);
  int block_size(int block) const;

  /// Adds to the constant term of a block. The matrix is symmetrized.
  void block_constant(int block, const Matrix& g0);

  /// Adds to the coefficient of variable `var` in a block (symmetrized).
  void block_coeff(int block, int var, const Matrix& gi);

  /// Scalar inequality g0 + sum_i coeffs_i y_i >= 0 as a 1x1 block.
  int add_scalar_ineq(double g0, const std::vector<std::pair<int, double>>& coeffs);

  /// Affine equality sum_i coeffs_i y_i = rhs.
  void add_equality(const std::vector<std::pair<int, double>>& coeffs, double rhs);

  /// Writes the problem data to a JSON file for offline inspection.
  void dump_json(const std::string& path) const;

  struct Block {
    int size = 0;
    Matrix constant;                 // size x size
    std::map<int, Matrix> coeffs;    // var index -> size x size
  };
  const std::vector<Block>& blocks() const { return blocks_; }
  const Vector& objective() const;

  struct Equality {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
  };
  const std::vector<Equality>& equalities() const { return equalities_; }

 private:
  int num_vars_ = 0;
  mutable Vector objective_;
  std::vector<Block> blocks_;
  std::vector<Equality> equalities_;
};

enum class SdpStatus { Optimal, Infeasible, MaxIter, NumericFailure };

struct SdpOptions {
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iters = 200;
  bool verbose = false;
};

struct SdpSolution {
  Vector values;
  SdpStatus status = SdpStatus::NumericFailure;
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> min_eig_slacks;  // smallest eigenvalue of each block
  double kkt_primal = std::numeric_limits<double>::quiet_NaN();
  double kkt_dual = std::numeric_limits<double>::quiet_NaN();
  double kkt_comp = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string message;

  double objective_value = std::numeric_limits<double>::quiet_NaN();
};

SdpSolution solve_sdp(const SdpProblem& prob, const SdpOptions& opts = {});

/// Affine matrix expression X(y) = constant + sum_i y_i * terms[i].second
/// over the variables terms[i].first. Rectangular in general.
struct AffineMatrix {
  Matrix constant;
  std::vector<std::pair<int, Matrix>> terms;
};

/// Appends the block [theta*I, X; X', theta*I] >= 0, which encodes the
/// singular value cap sigma_max(X(y)) <= theta. Returns the block index.
int singular_value_lmi(SdpProblem& prob, const AffineMatrix& x_expr,
                       double theta);

const char* to_string(SdpStatus status);

}  // namespace lcsctl

#endif  // LCSCTL_SDP_HPP
