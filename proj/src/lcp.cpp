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

#include "lcsctl/lcp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace lcsctl {

namespace {

constexpr double PIVOT_TOL = 1e-11;
constexpr double RATIO_TIE_TOL = 1e-9;

Matrix submatrix(const Matrix& M, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = M(rows[i], cols[j]);
  return out;
}

Vector subvector(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

// Variable numbering in the Lemke tableau: 0..m-1 slacks, m..2m-1 forces,
// 2m the covering variable z0.
int complement_of(int var, int m) { return var < m ? var + m : var - m; }

void pivot(Matrix& T, Eigen::VectorXi& basis, int row, int col, int var) {
  T.row(row) /= T(row, col);
  for (int i = 0; i < T.rows(); ++i) {
    if (i == row) continue;
    const double a = T(i, col);
    if (a != 0.0) T.row(i) -= a * T.row(row);
  }
  basis(row) = var;
}

}  // namespace

void LcpInstance::validate() const {
  require(F.rows() == F.cols(), "LcpInstance: F must be square");
  require(w.size() == F.rows(), "LcpInstance: w length must match F");
}

LcpSolution solve_lemke(const LcpInstance& inst, double tol, int max_pivots) {
  inst.validate();
  const int m = inst.size();
  LcpSolution sol;
  if (m == 0) {
    sol.lambda = Vector(0);
    sol.slack = Vector(0);
    return sol;
  }
  if (inst.w.minCoeff() >= 0.0) {
    sol.lambda = Vector::Zero(m);
    sol.slack = inst.w;
    return sol;
  }

  // Tableau [I | -F | -1 | w]; basis starts on the slacks.
  Matrix T(m, 2 * m + 2);
  T.leftCols(m) = Matrix::Identity(m, m);
  T.middleCols(m, m) = -inst.F;
  T.col(2 * m) = -Vector::Ones(m);
  T.col(2 * m + 1) = inst.w;
  Eigen::VectorXi basis = Eigen::VectorXi::LinSpaced(m, 0, m - 1);

  // z0 enters against the most negative slack.
  int row = 0;
  for (int i = 1; i < m; ++i)
    if (inst.w(i) < inst.w(row)) row = i;
  pivot(T, basis, row, 2 * m, 2 * m);
  int entering = complement_of(row, m);

  for (int iter = 0; iter < max_pivots; ++iter) {
    // Minimum ratio test; ties go to z0 first, then to the smallest
    // basic variable index (Bland) to rule out cycling.
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = T(i, entering);
      if (a <= PIVOT_TOL) continue;
      const double ratio = T(i, 2 * m + 1) / a;
      if (ratio < best_ratio - RATIO_TIE_TOL * (1.0 + std::abs(best_ratio))) {
        best = i;
        best_ratio = ratio;
      } else if (ratio <=
                 best_ratio + RATIO_TIE_TOL * (1.0 + std::abs(best_ratio))) {
        if (basis(i) == 2 * m) {
          best = i;
          best_ratio = ratio;
        } else if (best >= 0 && basis(best) != 2 * m &&
                   basis(i) < basis(best)) {
          best = i;
        }
      }
    }
    if (best < 0) {
      sol.lambda = Vector::Zero(m);
      sol.slack = inst.w;
      sol.status = LcpStatus::Ray;
      return sol;
    }
    const int leaving = basis(best);
    pivot(T, basis, best, entering, entering);
    if (leaving == 2 * m) {
      Vector lambda = Vector::Zero(m);
      for (int i = 0; i < m; ++i)
        if (basis(i) >= m && basis(i) < 2 * m)
          lambda(basis(i) - m) = std::max(0.0, T(i, 2 * m + 1));
      sol.lambda = lambda;
      sol.slack = inst.F * lambda + inst.w;
      sol.status = LcpStatus::Solved;
      const double resid = std::abs(sol.lambda.dot(sol.slack));
      if (resid > tol * (1.0 + sol.lambda.norm() * sol.slack.norm()))
        sol.status = LcpStatus::MaxPivots;
      return sol;
    }
    entering = complement_of(leaving, m);
  }
  sol.lambda = Vector::Zero(m);
  sol.slack = inst.w;
  sol.status = LcpStatus::MaxPivots;
  return sol;
}

std::vector<LcpSolution> solve_enumerate(const LcpInstance& inst) {
  inst.validate();
  const int m = inst.size();
  if (m > 12)
    throw SizeGuardError("solve_enumerate: m > 12 (2^m supports)");
  std::vector<LcpSolution> out;
  if (m == 0) {
    out.push_back({Vector(0), Vector(0), LcpStatus::Solved});
    return out;
  }
  const double scale = 1.0 + inst.w.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * scale;
  for (unsigned support = 0; support < (1u << m); ++support) {
    std::vector<int> alpha;
    for (int i = 0; i < m; ++i)
      if (support & (1u << i)) alpha.push_back(i);
    Vector lambda = Vector::Zero(m);
    if (!alpha.empty()) {
      const Matrix Faa = submatrix(inst.F, alpha, alpha);
      Eigen::FullPivLU<Matrix> lu(Faa);
      if (!lu.isInvertible()) continue;
      const Vector la = lu.solve(-subvector(inst.w, alpha));
      if (la.minCoeff() < -tol) continue;
      for (size_t i = 0; i < alpha.size(); ++i)
        lambda(alpha[i]) = std::max(0.0, la(i));
    }
    const Vector slack = inst.F * lambda + inst.w;
    if (slack.minCoeff() < -tol) continue;
    bool duplicate = false;
    for (const auto& prev : out)
      if ((prev.lambda - lambda).lpNorm<Eigen::Infinity>() < 1e-10 * scale)
        duplicate = true;
    if (!duplicate) out.push_back({lambda, slack, LcpStatus::Solved});
  }
  return out;
}

bool is_p_matrix(const Matrix& F) {
  require(F.rows() == F.cols(), "is_p_matrix: F must be square");
  const int m = static_cast<int>(F.rows());
  if (m > 20) throw SizeGuardError("is_p_matrix: m > 20 (2^m minors)");
  if (m == 0) return true;
  const double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
  for (unsigned subset = 1; subset < (1u << m); ++subset) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (subset & (1u << i)) idx.push_back(i);
    const Matrix sub = submatrix(F, idx, idx);
    const double det = sub.determinant();
    const double floor = 1e-12 * std::pow(scale, static_cast<double>(idx.size()));
    if (det <= floor) return false;
  }
  return true;
}

Vector contact_force(const Matrix& E, const Matrix& F, const Vector& c,
                     const Vector& x) {
  const int m = static_cast<int>(F.rows());
  require(F.cols() == m && E.rows() == m && c.size() == m,
          "contact_force: E/F/c dimensions disagree");
  require(E.cols() == x.size(), "contact_force: x length must match E");
  if (m == 0) return Vector(0);
  LcpInstance inst{F, E * x + c};
  LcpSolution sol = solve_lemke(inst);
  if (sol.status != LcpStatus::Solved)
    throw NotPMatrixError(
        "contact_force: Lemke did not terminate with a solution; F is not a "
        "P-matrix (or is numerically degenerate)");
  return sol.lambda;
}

IndexSets index_sets(const Matrix& E, const Matrix& F, const Vector& c,
                     const Vector& x, const Vector& lambda, double tie_tol) {
  const int m = static_cast<int>(F.rows());
  require(lambda.size() == m, "index_sets: lambda length must match F");
  const Vector slack = F * lambda + E * x + c;
  const double scale =
      1.0 + lambda.cwiseAbs().maxCoeff() + slack.cwiseAbs().maxCoeff();
  const double check_tol = std::max(tie_tol, 1e-8) * scale;
  IndexSets sets;
  sets.tie_tol = tie_tol;
  for (int i = 0; i < m; ++i) {
    if (lambda(i) < -check_tol || slack(i) < -check_tol ||
        std::abs(lambda(i) * slack(i)) > check_tol * scale)
      throw NotASolutionError("index_sets: (x, lambda) violates the LCP");
    const bool force_on = lambda(i) > tie_tol;
    const bool slack_on = slack(i) > tie_tol;
    if (force_on && slack_on)
      throw NotASolutionError("index_sets: complementarity violated");
    if (force_on)
      sets.alpha.push_back(i);
    else if (slack_on)
      sets.gamma.push_back(i);
    else
      sets.beta.push_back(i);
  }
  return sets;
}

Vector directional_derivative(const Matrix& E, const Matrix& F,
                              const Vector& c, const Vector& x,
                              const Vector& d) {
  const int m = static_cast<int>(F.rows());
  if (m == 0) return Vector(0);
  const Vector lambda = contact_force(E, F, c, x);
  const IndexSets sets = index_sets(E, F, c, x, lambda);
  const Vector ed = E * d;

  Vector lbar = Vector::Zero(m);
  if (sets.alpha.empty() && sets.beta.empty()) return lbar;

  // Alpha stays at equality; the degenerate block is a smaller LCP over the
  // Schur complement, which inherits the P-property.
  Matrix Faa_inv;
  if (!sets.alpha.empty()) {
    Eigen::FullPivLU<Matrix> lu(submatrix(F, sets.alpha, sets.alpha));
    if (!lu.isInvertible())
      throw NotPMatrixError("directional_derivative: singular active block");
    Faa_inv = lu.inverse();
  }

  Vector lbar_beta;
  if (!sets.beta.empty()) {
    Matrix Ft = submatrix(F, sets.beta, sets.beta);
    Vector wt = subvector(ed, sets.beta);
    if (!sets.alpha.empty()) {
      const Matrix Fba = submatrix(F, sets.beta, sets.alpha);
      const Matrix Fab = submatrix(F, sets.alpha, sets.beta);
      Ft -= Fba * Faa_inv * Fab;
      wt -= Fba * Faa_inv * subvector(ed, sets.alpha);
    }
    LcpSolution sol = solve_lemke({Ft, wt});
    if (sol.status != LcpStatus::Solved)
      throw NotPMatrixError(
          "directional_derivative: reduced beta-block LCP unsolved");
    lbar_beta = sol.lambda;
    for (size_t i = 0; i < sets.beta.size(); ++i)
      lbar(sets.beta[i]) = lbar_beta(i);
  }

  if (!sets.alpha.empty()) {
    Vector rhs = subvector(ed, sets.alpha);
    if (!sets.beta.empty())
      rhs += submatrix(F, sets.alpha, sets.beta) * lbar_beta;
    const Vector la = -Faa_inv * rhs;
    for (size_t i = 0; i < sets.alpha.size(); ++i)
      lbar(sets.alpha[i]) = la(i);
  }
  return lbar;
}

}  // namespace lcsctl
