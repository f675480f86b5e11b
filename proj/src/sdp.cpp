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

#include "lcsctl/sdp.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace lcsctl {

namespace {

constexpr int kMaxBlockSize = 100;

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void sym_eig(const Matrix& m, Matrix& vectors, Vector& values) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  vectors = es.eigenvectors();
  values = es.eigenvalues();
}

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  return es.eigenvalues().minCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// Largest alpha with X + alpha * dX staying PSD, capped at a huge value.
double max_step(const Matrix& X, const Matrix& dX) {
  const double huge = 1e12;
  Eigen::LLT<Matrix> llt(X);
  Matrix Y;
  if (llt.info() == Eigen::Success) {
    const Matrix L = llt.matrixL();
    const Matrix Yt =
        L.triangularView<Eigen::Lower>().solve(dX).transpose();
    Y = L.triangularView<Eigen::Lower>().solve(Yt);
  } else {
    Matrix U;
    Vector d;
    sym_eig(X, U, d);
    const double floor = 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff());
    const Vector dinv_sqrt =
        d.cwiseMax(floor).cwiseSqrt().cwiseInverse();
    const Matrix Xih = U * dinv_sqrt.asDiagonal() * U.transpose();
    Y = Xih * dX * Xih;
  }
  const double nu = min_eigenvalue(Y);
  if (nu >= -1e-14) return huge;
  return std::min(huge, -1.0 / nu);
}

struct CoreBlock {
  int size = 0;
  Matrix C;
  std::vector<int> vars;
  std::vector<Matrix> A;  // A_i = -G_i, aligned with vars
};

struct Scaling {
  Matrix Wh;
  Matrix Whinv;
  Matrix lam_basis;
  Vector lam;
};

Scaling compute_scaling(const Matrix& X, const Matrix& S) {
  Matrix Ux;
  Vector dx;
  sym_eig(X, Ux, dx);
  const double fx = 1e-14 * std::max(1.0, dx.cwiseAbs().maxCoeff());
  dx = dx.cwiseMax(fx);
  const Matrix Xh = Ux * dx.cwiseSqrt().asDiagonal() * Ux.transpose();

  Matrix Ug;
  Vector dg;
  sym_eig(Xh * S * Xh, Ug, dg);
  const double fg = 1e-14 * std::max(1.0, dg.cwiseAbs().maxCoeff());
  dg = dg.cwiseMax(fg);
  const Matrix Ginvh =
      Ug * dg.cwiseSqrt().cwiseInverse().asDiagonal() * Ug.transpose();

  Matrix Uw;
  Vector dw;
  sym_eig(Xh * Ginvh * Xh, Uw, dw);
  const double fw = 1e-14 * std::max(1.0, dw.cwiseAbs().maxCoeff());
  dw = dw.cwiseMax(fw);

  Scaling sc;
  sc.Wh = Uw * dw.cwiseSqrt().asDiagonal() * Uw.transpose();
  sc.Whinv = Uw * dw.cwiseSqrt().cwiseInverse().asDiagonal() * Uw.transpose();
  const Matrix lam_mat =
      symmetrize(0.5 * (sc.Whinv * X * sc.Whinv + sc.Wh * S * sc.Wh));
  sym_eig(lam_mat, sc.lam_basis, sc.lam);
  const double fl = 1e-14 * std::max(1.0, sc.lam.cwiseAbs().maxCoeff());
  sc.lam = sc.lam.cwiseMax(fl);
  return sc;
}

struct CoreResult {
  SdpStatus status = SdpStatus::NumericFailure;
  Vector y;
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  double kkt_primal = std::numeric_limits<double>::quiet_NaN();
  double kkt_dual = std::numeric_limits<double>::quiet_NaN();
  double kkt_comp = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string message;
};

// Interior-point core on: maximize b'y  s.t.  C_j - sum_i y_i A_ji PSD.
CoreResult core_solve(int p, const Vector& b_in,
                      std::vector<CoreBlock> blocks, const SdpOptions& opts) {
  CoreResult out;
  out.y = Vector::Zero(p);

  // Constant blocks only gate feasibility; check and drop them.
  {
    std::vector<CoreBlock> active;
    for (auto& blk : blocks) {
      if (blk.size == 0) continue;
      if (blk.vars.empty()) {
        const double scale = std::max(1.0, blk.C.norm());
        if (min_eigenvalue(blk.C) < -1e-9 * scale) {
          out.status = SdpStatus::Infeasible;
          out.message = "constant block is not positive semidefinite";
          return out;
        }
      } else {
        active.push_back(std::move(blk));
      }
    }
    blocks = std::move(active);
  }

  if (blocks.empty()) {
    out.status = SdpStatus::Optimal;
    out.rel_gap = 0.0;
    out.kkt_primal = out.kkt_dual = out.kkt_comp = 0.0;
    if (b_in.size() > 0 && b_in.cwiseAbs().maxCoeff() > 0.0) {
      out.message = "no PSD blocks constrain the objective";
    }
    return out;
  }

  // Ruiz equilibration: alternately scale blocks (a row scaling that leaves
  // each LMI unchanged) and variables (the substitution y_i = s_i v_i)
  // toward unit coefficient norms.  Data spanning many orders of magnitude
  // otherwise wrecks the Schur complement conditioning.
  Vector colscale = Vector::Ones(p);
  for (int sweep = 0; sweep < 5; ++sweep) {
    for (auto& blk : blocks) {
      double rmax = blk.C.norm();
      for (const auto& a : blk.A) rmax = std::max(rmax, a.norm());
      if (rmax <= 0.0) continue;
      const double rs = 1.0 / std::sqrt(rmax);
      blk.C *= rs;
      for (auto& a : blk.A) a *= rs;
    }
    Vector cmax = Vector::Zero(p);
    for (const auto& blk : blocks) {
      for (std::size_t t = 0; t < blk.A.size(); ++t) {
        cmax(blk.vars[t]) = std::max(cmax(blk.vars[t]), blk.A[t].norm());
      }
    }
    Vector cs = Vector::Ones(p);
    for (int i = 0; i < p; ++i) {
      if (cmax(i) > 0.0) cs(i) = 1.0 / std::sqrt(cmax(i));
    }
    colscale = colscale.cwiseProduct(cs);
    for (auto& blk : blocks) {
      for (std::size_t t = 0; t < blk.A.size(); ++t) blk.A[t] *= cs(blk.vars[t]);
    }
  }
  Vector b = b_in.cwiseProduct(colscale);
  const double bscale = std::max(1.0, b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  b /= bscale;

  const int nb = static_cast<int>(blocks.size());
  int total_dim = 0;
  for (const auto& blk : blocks) total_dim += blk.size;

  // Infeasible start.
  std::vector<Matrix> X(nb), S(nb);
  Vector y = Vector::Zero(p);
  for (int j = 0; j < nb; ++j) {
    const auto& blk = blocks[j];
    double xi = std::max(10.0, std::sqrt(double(blk.size)));
    double eta = std::max(10.0, std::sqrt(double(blk.size)));
    eta = std::max(eta, blk.C.norm());
    for (std::size_t t = 0; t < blk.A.size(); ++t) {
      const double an = blk.A[t].norm();
      xi = std::max(xi, blk.size * (1.0 + std::abs(b(blk.vars[t]))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    X[j] = xi * Matrix::Identity(blk.size, blk.size);
    S[j] = eta * Matrix::Identity(blk.size, blk.size);
  }

  const double init_norm_x = [&] {
    double s = 0.0;
    for (const auto& xj : X) s = std::max(s, xj.norm());
    return s;
  }();

  std::vector<Matrix> Rd(nb), WAW_flat;
  Vector rp(p);
  int stall_count = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  double progress_ref = std::numeric_limits<double>::infinity();
  int no_progress = 0;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.iterations = iter;

    // Residuals.
    rp = b;
    for (int j = 0; j < nb; ++j) {
      const auto& blk = blocks[j];
      for (std::size_t t = 0; t < blk.A.size(); ++t) {
        rp(blk.vars[t]) -= (blk.A[t].array() * X[j].array()).sum();
      }
      Matrix rd = blk.C - S[j];
      for (std::size_t t = 0; t < blk.A.size(); ++t) {
        rd -= y(blk.vars[t]) * blk.A[t];
      }
      Rd[j] = rd;
    }

    double gap = 0.0;
    double pobj = 0.0;
    for (int j = 0; j < nb; ++j) {
      gap += (X[j].array() * S[j].array()).sum();
      pobj += (blocks[j].C.array() * X[j].array()).sum();
    }
    const double dobj = b.dot(y);
    const double mu = gap / total_dim;

    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = std::abs(gap) / denom;
    const double prim_inf = rp.norm() / (1.0 + b.norm());
    double dual_inf = 0.0;
    double comp = 0.0;
    for (int j = 0; j < nb; ++j) {
      dual_inf = std::max(dual_inf, Rd[j].norm() / (1.0 + blocks[j].C.norm()));
      comp = std::max(comp, (X[j] * S[j]).norm() / denom);
    }

    if (opts.verbose) {
      std::cerr << "sdp iter " << iter << " gap " << rel_gap << " pinf "
                << prim_inf << " dinf " << dual_inf << " mu " << mu << "\n";
    }

    // Keep the best iterate seen so far; non-optimal exits then report it
    // instead of a possibly degraded last iterate.
    const double merit = rel_gap + 10.0 * std::max(prim_inf, dual_inf);
    const auto record = [&] {
      out.rel_gap = rel_gap;
      out.kkt_primal = prim_inf;
      out.kkt_dual = dual_inf;
      out.kkt_comp = comp;
      out.y = colscale.cwiseProduct(y);
    };
    if (merit < best_merit) {
      best_merit = merit;
      record();
    }

    if (rel_gap <= opts.gap_tol && prim_inf <= opts.feas_tol &&
        dual_inf <= opts.feas_tol) {
      record();
      out.status = SdpStatus::Optimal;
      return out;
    }

    // Cut losses once the merit stops improving meaningfully.
    if (merit < 0.999 * progress_ref) {
      progress_ref = merit;
      no_progress = 0;
    } else if (++no_progress >= 10) {
      out.status = SdpStatus::MaxIter;
      out.message = "progress stalled";
      return out;
    }

    // Improving-ray heuristics for infeasibility and unboundedness.
    double xnorm = 0.0;
    for (const auto& xj : X) xnorm = std::max(xnorm, xj.norm());
    if (xnorm > 1e8 * (1.0 + init_norm_x)) {
      double ray_obj = pobj / xnorm;
      double ray_feas = 0.0;
      for (int i = 0; i < p; ++i) ray_feas = std::max(ray_feas, std::abs(b(i) - rp(i)) / xnorm);
      if (ray_obj < -1e-9 && ray_feas < 1e-9) {
        out.status = SdpStatus::Infeasible;
        out.message = "primal improving ray found";
        return out;
      }
    }
    const double ynorm = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    if (ynorm > 1e9) {
      double slack_growth = -1e30;
      for (int j = 0; j < nb; ++j) {
        Matrix ay = Matrix::Zero(blocks[j].size, blocks[j].size);
        for (std::size_t t = 0; t < blocks[j].A.size(); ++t) {
          ay += (y(blocks[j].vars[t]) / ynorm) * blocks[j].A[t];
        }
        slack_growth = std::max(slack_growth, min_eigenvalue(ay));
      }
      if (b.dot(y) / ynorm > 1e-9 && slack_growth < 1e-9) {
        out.status = SdpStatus::MaxIter;
        out.message = "objective appears unbounded along a ray";
        return out;
      }
    }

    // NT scaling and the Schur complement, shared by both direction solves.
    std::vector<Scaling> sc(nb);
    std::vector<std::vector<Matrix>> WAW(nb);
    for (int j = 0; j < nb; ++j) {
      sc[j] = compute_scaling(X[j], S[j]);
      const Matrix W = sc[j].Wh * sc[j].Wh;
      WAW[j].resize(blocks[j].A.size());
      for (std::size_t t = 0; t < blocks[j].A.size(); ++t) {
        WAW[j][t] = symmetrize(W * blocks[j].A[t] * W);
      }
    }

    Matrix M = Matrix::Zero(p, p);
    for (int j = 0; j < nb; ++j) {
      const auto& blk = blocks[j];
      const int nv = static_cast<int>(blk.vars.size());
      for (int t = 0; t < nv; ++t) {
        for (int u = 0; u <= t; ++u) {
          const double v = (blk.A[t].array() * WAW[j][u].array()).sum();
          M(blk.vars[t], blk.vars[u]) += v;
          if (t != u) M(blk.vars[u], blk.vars[t]) += v;
        }
      }
    }
    if (!all_finite(M)) {
      out.status = SdpStatus::NumericFailure;
      out.message = "non-finite Schur complement";
      return out;
    }

    double ridge = 0.0;
    Eigen::LDLT<Matrix> ldlt;
    const double mtrace = M.trace();
    for (int attempt = 0; attempt < 4; ++attempt) {
      Matrix Mreg = M;
      if (ridge > 0.0) Mreg += ridge * Matrix::Identity(p, p);
      ldlt.compute(Mreg);
      if (ldlt.info() == Eigen::Success) {
        const Vector probe = ldlt.solve(Vector::Ones(p));
        if (probe.allFinite()) break;
      }
      ridge = (ridge == 0.0) ? 1e-12 * (1.0 + mtrace / p) : ridge * 100.0;
    }

    // Reusable direction solve for a given scaled complementarity target.
    std::vector<Matrix> dX(nb), dS(nb);
    Vector dy(p);
    const auto solve_direction = [&](const std::vector<Matrix>& rhs_c) -> bool {
      Vector q = rp;
      std::vector<Matrix> R(nb);
      for (int j = 0; j < nb; ++j) {
        const Matrix T = sc[j].Wh * rhs_c[j] * sc[j].Wh;
        const Matrix W = sc[j].Wh * sc[j].Wh;
        R[j] = T - W * Rd[j] * W;
        for (std::size_t t = 0; t < blocks[j].A.size(); ++t) {
          q(blocks[j].vars[t]) -= (blocks[j].A[t].array() * R[j].array()).sum();
        }
      }
      dy = ldlt.solve(q);
      if (!dy.allFinite()) return false;
      // Refine against the unregularized system; recovers the digits the
      // ridge and roundoff in the Schur assembly cost us.
      for (int r = 0; r < 2; ++r) {
        const Vector resid = q - M * dy;
        const Vector corr = ldlt.solve(resid);
        if (!corr.allFinite()) break;
        dy += corr;
      }
      for (int j = 0; j < nb; ++j) {
        const auto& blk = blocks[j];
        Matrix ds = Rd[j];
        Matrix dx = R[j];
        for (std::size_t t = 0; t < blk.A.size(); ++t) {
          ds -= dy(blk.vars[t]) * blk.A[t];
          dx += dy(blk.vars[t]) * WAW[j][t];
        }
        dS[j] = symmetrize(ds);
        dX[j] = symmetrize(dx);
        if (!all_finite(dS[j]) || !all_finite(dX[j])) return false;
      }
      return true;
    };

    // Predictor: affine direction, scaled target -lambda.
    std::vector<Matrix> rhs_c(nb);
    for (int j = 0; j < nb; ++j) {
      rhs_c[j] = -(sc[j].lam_basis * sc[j].lam.asDiagonal() *
                   sc[j].lam_basis.transpose());
    }
    if (!solve_direction(rhs_c)) {
      out.status = SdpStatus::NumericFailure;
      out.message = "non-finite predictor step";
      return out;
    }

    double ap_aff = 1.0, ad_aff = 1.0;
    for (int j = 0; j < nb; ++j) {
      ap_aff = std::min(ap_aff, max_step(X[j], dX[j]));
      ad_aff = std::min(ad_aff, max_step(S[j], dS[j]));
    }
    double gap_aff = 0.0;
    for (int j = 0; j < nb; ++j) {
      gap_aff += ((X[j] + ap_aff * dX[j]).array() *
                  (S[j] + ad_aff * dS[j]).array())
                     .sum();
    }
    double sigma = std::pow(std::max(0.0, gap_aff) / gap, 3.0);
    sigma = std::min(1.0, std::max(1e-8, sigma));

    // Corrector: Mehrotra second-order term in the scaled space.
    std::vector<Matrix> dXa = dX, dSa = dS;
    bool ok = true;
    for (int j = 0; j < nb; ++j) {
      const Matrix dxh = sc[j].Whinv * dXa[j] * sc[j].Whinv;
      const Matrix dsh = sc[j].Wh * dSa[j] * sc[j].Wh;
      const Matrix H = symmetrize(dxh * dsh);
      const Matrix Bt = sc[j].lam_basis.transpose() *
                            (sigma * mu * Matrix::Identity(blocks[j].size, blocks[j].size) - H) *
                            sc[j].lam_basis;
      Matrix U(blocks[j].size, blocks[j].size);
      for (int a = 0; a < blocks[j].size; ++a) {
        for (int c = 0; c < blocks[j].size; ++c) {
          double num = 2.0 * Bt(a, c);
          if (a == c) num -= 2.0 * sc[j].lam(a) * sc[j].lam(a);
          U(a, c) = num / (sc[j].lam(a) + sc[j].lam(c));
        }
      }
      rhs_c[j] = symmetrize(sc[j].lam_basis * U * sc[j].lam_basis.transpose());
      if (!all_finite(rhs_c[j])) ok = false;
    }
    if (ok) ok = solve_direction(rhs_c);
    if (!ok) {
      // Plain centering fallback.
      sigma = 0.5;
      for (int j = 0; j < nb; ++j) {
        Matrix U(blocks[j].size, blocks[j].size);
        for (int a = 0; a < blocks[j].size; ++a) {
          for (int c = 0; c < blocks[j].size; ++c) {
            double num = (a == c) ? 2.0 * (sigma * mu - sc[j].lam(a) * sc[j].lam(a)) : 0.0;
            U(a, c) = num / (sc[j].lam(a) + sc[j].lam(c));
          }
        }
        rhs_c[j] = symmetrize(sc[j].lam_basis * U * sc[j].lam_basis.transpose());
      }
      if (!solve_direction(rhs_c)) {
        out.status = SdpStatus::NumericFailure;
        out.message = "non-finite Newton step";
        return out;
      }
    }

    // Step fraction approaches 1 as the barrier parameter shrinks.
    const double tau = std::min(0.9999, std::max(0.99, 1.0 - 10.0 * mu));
    double ap = 1.0, ad = 1.0;
    for (int j = 0; j < nb; ++j) {
      ap = std::min(ap, tau * max_step(X[j], dX[j]));
      ad = std::min(ad, tau * max_step(S[j], dS[j]));
    }
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    if (std::min(ap, ad) < 1e-7) {
      if (++stall_count >= 5) {
        out.status = SdpStatus::MaxIter;
        out.message = "step length stalled";
        return out;
      }
    } else {
      stall_count = 0;
    }

    for (int j = 0; j < nb; ++j) {
      X[j] = symmetrize(X[j] + ap * dX[j]);
      S[j] = symmetrize(S[j] + ad * dS[j]);
    }
    y += ad * dy;
    if (!y.allFinite()) {
      out.status = SdpStatus::NumericFailure;
      out.message = "non-finite iterate";
      return out;
    }
  }

  out.status = SdpStatus::MaxIter;
  out.message = "iteration limit reached";
  return out;
}

}  // namespace

SdpProblem::SdpProblem(int num_vars) : num_vars_(num_vars) {
  require(num_vars >= 0, "variable count must be nonnegative");
  objective_ = Vector::Zero(num_vars);
}

int SdpProblem::add_var(double objective_coeff) {
  objective_.conservativeResize(num_vars_ + 1);
  objective_(num_vars_) = objective_coeff;
  return num_vars_++;
}

void SdpProblem::set_objective(const Vector& b) {
  require(b.size() == num_vars_, "objective size must match variable count");
  objective_ = b;
}

void SdpProblem::set_objective_coeff(int var, double coeff) {
  require(var >= 0 && var < num_vars_, "objective index out of range");
  objective_(var) = coeff;
}

int SdpProblem::add_block(int size) {
  require(size >= 0 && size <= kMaxBlockSize, "block size out of range");
  Block blk;
  blk.size = size;
  blk.constant = Matrix::Zero(size, size);
  blocks_.push_back(std::move(blk));
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::block_size(int block) const {
  require(block >= 0 && block < num_blocks(), "block index out of range");
  return blocks_[block].size;
}

void SdpProblem::block_constant(int block, const Matrix& g0) {
  require(block >= 0 && block < num_blocks(), "block index out of range");
  auto& blk = blocks_[block];
  require(g0.rows() == blk.size && g0.cols() == blk.size,
          "constant term dimension mismatch");
  blk.constant += 0.5 * (g0 + g0.transpose());
}

void SdpProblem::block_coeff(int block, int var, const Matrix& gi) {
  require(block >= 0 && block < num_blocks(), "block index out of range");
  require(var >= 0 && var < num_vars_, "variable index out of range");
  auto& blk = blocks_[block];
  require(gi.rows() == blk.size && gi.cols() == blk.size,
          "coefficient dimension mismatch");
  auto it = blk.coeffs.find(var);
  if (it == blk.coeffs.end()) {
    blk.coeffs.emplace(var, 0.5 * (gi + gi.transpose()));
  } else {
    it->second += 0.5 * (gi + gi.transpose());
  }
}

int SdpProblem::add_scalar_ineq(double g0,
                                const std::vector<std::pair<int, double>>& coeffs) {
  const int blk = add_block(1);
  block_constant(blk, Matrix::Constant(1, 1, g0));
  for (const auto& [var, coeff] : coeffs) {
    block_coeff(blk, var, Matrix::Constant(1, 1, coeff));
  }
  return blk;
}

void SdpProblem::add_equality(const std::vector<std::pair<int, double>>& coeffs,
                              double rhs) {
  for (const auto& [var, coeff] : coeffs) {
    require(var >= 0 && var < num_vars_, "equality index out of range");
    (void)coeff;
  }
  equalities_.push_back(Equality{coeffs, rhs});
}

const Vector& SdpProblem::objective() const {
  if (objective_.size() != num_vars_) {
    Vector padded = Vector::Zero(num_vars_);
    padded.head(objective_.size()) = objective_;
    objective_ = padded;
  }
  return objective_;
}

void SdpProblem::dump_json(const std::string& path) const {
  nlohmann::json doc;
  doc["num_vars"] = num_vars_;
  doc["objective"] = std::vector<double>(objective().data(),
                                         objective().data() + num_vars_);
  doc["blocks"] = nlohmann::json::array();
  for (const auto& blk : blocks_) {
    nlohmann::json jb;
    jb["size"] = blk.size;
    auto mat_to_json = [](const Matrix& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
      }
      return rows;
    };
    jb["constant"] = mat_to_json(blk.constant);
    jb["coeffs"] = nlohmann::json::object();
    for (const auto& [var, mat] : blk.coeffs) {
      jb["coeffs"][std::to_string(var)] = mat_to_json(mat);
    }
    doc["blocks"].push_back(jb);
  }
  doc["equalities"] = nlohmann::json::array();
  for (const auto& eq : equalities_) {
    nlohmann::json je;
    je["rhs"] = eq.rhs;
    je["coeffs"] = nlohmann::json::object();
    for (const auto& [var, coeff] : eq.coeffs) {
      je["coeffs"][std::to_string(var)] = coeff;
    }
    doc["equalities"].push_back(je);
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << doc.dump(1) << "\n";
}

SdpSolution solve_sdp(const SdpProblem& prob, const SdpOptions& opts) {
  const int p = prob.num_vars();
  const Vector b = prob.objective();

  SdpSolution sol;
  sol.values = Vector::Zero(p);

  // Eliminate affine equalities: y = y_part + Z v with Z an orthonormal
  // nullspace basis, then solve the reduced inequality-form problem in v.
  Vector y_part = Vector::Zero(p);
  Matrix Z;
  bool reduced = false;
  int pr = p;
  if (!prob.equalities().empty()) {
    const int q = static_cast<int>(prob.equalities().size());
    Matrix Aeq = Matrix::Zero(q, p);
    Vector req = Vector::Zero(q);
    for (int r = 0; r < q; ++r) {
      for (const auto& [var, coeff] : prob.equalities()[r].coeffs) {
        Aeq(r, var) += coeff;
      }
      req(r) = prob.equalities()[r].rhs;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(Aeq);
    y_part = qr.solve(req);
    if ((Aeq * y_part - req).norm() > 1e-9 * (1.0 + req.norm())) {
      sol.status = SdpStatus::Infeasible;
      sol.message = "inconsistent equality constraints";
      return sol;
    }
    Eigen::ColPivHouseholderQR<Matrix> qrt(Aeq.transpose());
    const int rank = static_cast<int>(qrt.rank());
    const Matrix Qfull = qrt.householderQ() * Matrix::Identity(p, p);
    Z = Qfull.rightCols(p - rank);
    pr = p - rank;
    reduced = true;
  }

  // Reduced data: C_j = G_j(y_part), A coefficients mapped through Z.
  std::vector<CoreBlock> core;
  core.reserve(prob.blocks().size());
  for (const auto& blk : prob.blocks()) {
    CoreBlock cb;
    cb.size = blk.size;
    cb.C = blk.constant;
    for (const auto& [var, mat] : blk.coeffs) {
      if (reduced) cb.C += y_part(var) * mat;
    }
    if (!reduced) {
      for (const auto& [var, mat] : blk.coeffs) {
        cb.vars.push_back(var);
        cb.A.push_back(-mat);
      }
    } else {
      for (int l = 0; l < pr; ++l) {
        Matrix gi = Matrix::Zero(blk.size, blk.size);
        for (const auto& [var, mat] : blk.coeffs) {
          const double z = Z(var, l);
          if (z != 0.0) gi += z * mat;
        }
        if (gi.norm() > 1e-14 * std::max(1.0, cb.C.norm())) {
          cb.vars.push_back(l);
          cb.A.push_back(-gi);
        }
      }
    }
    core.push_back(std::move(cb));
  }
  const Vector br = reduced ? Vector(Z.transpose() * b) : b;

  CoreResult res = core_solve(pr, br, std::move(core), opts);

  sol.status = res.status;
  sol.duality_gap = res.rel_gap;
  sol.kkt_primal = res.kkt_primal;
  sol.kkt_dual = res.kkt_dual;
  sol.kkt_comp = res.kkt_comp;
  sol.iterations = res.iterations;
  sol.message = res.message;
  sol.values = reduced ? Vector(y_part + Z * res.y) : res.y;
  sol.objective_value = b.dot(sol.values);

  sol.min_eig_slacks.clear();
  for (const auto& blk : prob.blocks()) {
    Matrix g = blk.constant;
    for (const auto& [var, mat] : blk.coeffs) g += sol.values(var) * mat;
    sol.min_eig_slacks.push_back(blk.size == 0 ? 0.0 : min_eigenvalue(g));
  }
  return sol;
}

int singular_value_lmi(SdpProblem& prob, const AffineMatrix& x_expr,
                       double theta) {
  require(theta > 0.0, "singular value cap must be positive");
  const int r = static_cast<int>(x_expr.constant.rows());
  const int c = static_cast<int>(x_expr.constant.cols());
  const int blk = prob.add_block(r + c);
  Matrix g0 = theta * Matrix::Identity(r + c, r + c);
  g0.topRightCorner(r, c) = x_expr.constant;
  g0.bottomLeftCorner(c, r) = x_expr.constant.transpose();
  prob.block_constant(blk, g0);
  for (const auto& [var, mat] : x_expr.terms) {
    require(mat.rows() == r && mat.cols() == c,
            "affine term dimension mismatch");
    Matrix gi = Matrix::Zero(r + c, r + c);
    gi.topRightCorner(r, c) = mat;
    gi.bottomLeftCorner(c, r) = mat.transpose();
    prob.block_coeff(blk, var, gi);
  }
  return blk;
}

const char* to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIter: return "MaxIter";
    case SdpStatus::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

}  // namespace lcsctl
