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

#include "lcsctl/synthesis.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "lcsctl/riccati.hpp"

namespace lcsctl {

namespace {

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

std::string key2(const char* stem, int i, int j) {
  std::ostringstream os;
  os << stem << "[" << i << "," << j << "]";
  return os.str();
}

std::string key1(const char* stem, int i) {
  std::ostringstream os;
  os << stem << "[" << i << "]";
  return os.str();
}

// Linear functional over the working coordinates plus a constant offset.
struct Functional {
  Vector lin;
  double c0 = 0.0;
};

Functional coordinate(int dim, int idx) {
  Functional f;
  f.lin = Vector::Zero(dim);
  f.lin(idx) = 1.0;
  return f;
}

// One S-procedure product: quadratic part (a symmetric form), the linear
// residue its constants leave behind, and the multiplier sign convention.
struct QuadProduct {
  std::string name;
  bool nonneg = true;  // false for equality products (free multiplier)
  Matrix form;
  Vector lin;
  double constant = 0.0;
};

QuadProduct product_of(const std::string& name, bool nonneg,
                       const Functional& a, const Functional& b) {
  QuadProduct p;
  p.name = name;
  p.nonneg = nonneg;
  p.form = 0.5 * (a.lin * b.lin.transpose() + b.lin * a.lin.transpose());
  p.lin = a.c0 * b.lin + b.c0 * a.lin;
  p.constant = a.c0 * b.c0;
  return p;
}

QuadProduct form_product(const std::string& name, bool nonneg, Matrix form) {
  QuadProduct p;
  p.name = name;
  p.nonneg = nonneg;
  p.form = std::move(form);
  p.lin = Vector::Zero(p.form.rows());
  return p;
}

// Complementarity-pair products for Gamma_SOL over coordinates that start
// with [x; lam]: lam_i lam_j (i<j), lam_i w_j, w_i w_j (only when both
// constants vanish, otherwise the origin forces the multiplier to zero).
std::vector<QuadProduct> gamma_sol_products(const Matrix& E, const Matrix& F,
                                            const Vector& c, int dim,
                                            const char* prefix) {
  const int n = static_cast<int>(E.cols());
  const int m = static_cast<int>(E.rows());
  std::vector<QuadProduct> out;

  std::vector<Functional> lam(m), w(m);
  for (int i = 0; i < m; ++i) {
    lam[i] = coordinate(dim, n + i);
    w[i].lin = Vector::Zero(dim);
    w[i].lin.head(n) = E.row(i).transpose();
    w[i].lin.segment(n, m) = F.row(i).transpose();
    w[i].c0 = c(i);
  }

  const std::string pre(prefix);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      out.push_back(product_of(pre + key2(".a", i, j), true, lam[i], lam[j]));
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      // lam_i = 0 whenever w_i has a positive offset and lam_j w_i would
      // leave an uncancelable linear residue; skip the pinned multipliers.
      if (c(i) == 0.0 && c(j) > 0.0) continue;
      out.push_back(product_of(pre + key2(".b", i, j), true, lam[i], w[j]));
    }
  }
  for (int i = 0; i < m; ++i) {
    out.push_back(product_of(pre + key1(".mu", i), false, lam[i], w[i]));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (c(i) == 0.0 && c(j) == 0.0) {
        out.push_back(product_of(pre + key2(".ww", i, j), true, w[i], w[j]));
      }
    }
  }
  return out;
}

// A PSD block assembled in full coordinates and emitted conjugated onto the
// complement of a structural null subspace.  The decrease LMI vanishes
// identically on directions V (x = 0, lam = 0, F lambar + rho = 0), so
// semidefiniteness there is equivalent to semidefiniteness on the
// complement plus linear equalities killing the cross terms G(y) V = 0.
// Without the reduction the feasible set has empty interior and the
// interior-point solver cannot close the duality gap.
struct ReducedBlock {
  int block = -1;
  Matrix U;  // dim x (dim - r) orthonormal complement basis
  Matrix V;  // dim x r annihilated directions
  Matrix C;  // accumulated constant term, full coordinates
  std::vector<std::pair<int, Matrix>> terms;

  void init(SdpProblem& prob, int dim, const Matrix& null_dirs) {
    V = null_dirs;
    const int r = static_cast<int>(V.cols());
    if (r == 0) {
      U = Matrix::Identity(dim, dim);
    } else {
      Eigen::HouseholderQR<Matrix> qr(V);
      const Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
      U = q.rightCols(dim - r);
    }
    C = Matrix::Zero(dim, dim);
    block = prob.add_block(dim - r);
  }

  void constant(const Matrix& g) { C += g; }
  void coeff(int id, const Matrix& g) { terms.push_back({id, g}); }

  void flush(SdpProblem& prob) const {
    prob.block_constant(block, U.transpose() * C * U);
    for (const auto& [id, g] : terms) {
      prob.block_coeff(block, id, U.transpose() * g * U);
    }
    for (int j = 0; j < V.cols(); ++j) {
      const Vector vj = V.col(j);
      for (int a = 0; a < U.cols(); ++a) {
        const Vector ua = U.col(a);
        std::vector<std::pair<int, double>> coeffs;
        for (const auto& [id, g] : terms) {
          const double val = ua.dot(g * vj);
          if (std::abs(val) > 1e-12) coeffs.push_back({id, val});
        }
        const double rhs = -ua.dot(C * vj);
        if (coeffs.empty() && std::abs(rhs) <= 1e-12) continue;
        prob.add_equality(coeffs, rhs);
      }
    }
  }
};

// Null directions of the decrease block for the chosen representation.
Matrix decrease_null_dirs(const BmiProgram& bmi) {
  const int n = bmi.model.n();
  const int m = bmi.model.m();
  const bool gamma2 = bmi.opts.representation == GammaRepresentation::Gamma2;
  const int dim = gamma2 ? n + 3 * m : n + 2 * m;
  if (!gamma2 || m == 0) return Matrix::Zero(dim, 0);
  if (bmi.eb_zero) {
    // (x, lam) = 0 with F lambar + rho = 0 kills every relaxation term.
    Matrix v = Matrix::Zero(dim, m);
    for (int j = 0; j < m; ++j) {
      v(n + m + j, j) = 1.0;
      v.block(n + 2 * m, j, m, 1) = -bmi.model.F.col(j);
    }
    return v;
  }
  // Without the q products nothing constrains (lambar, rho) at all.
  Matrix v = Matrix::Zero(dim, 2 * m);
  for (int j = 0; j < 2 * m; ++j) v(n + m + j, j) = 1.0;
  return v;
}

// Registers multiplier variables for the products, wires their quadratic
// parts into the PSD block, adds sign blocks, and emits the per-coordinate
// cancellation rows that absorb the linear residues of the constants.
struct ProductVars {
  std::vector<int> ids;
  std::vector<std::string> names;
};

ProductVars install_products(SdpProblem& prob, int block,
                             const std::vector<QuadProduct>& products, int n,
                             int m, ReducedBlock* reduced = nullptr) {
  ProductVars pv;
  const int dim = static_cast<int>(products.empty() ? 0 : products[0].form.rows());
  for (const auto& p : products) {
    const int id = prob.add_var();
    pv.ids.push_back(id);
    pv.names.push_back(p.name);
    if (reduced) {
      reduced->coeff(id, -p.form);
    } else {
      prob.block_coeff(block, id, -p.form);
    }
    if (p.nonneg) {
      prob.add_scalar_ineq(0.0, {{id, 1.0}});
    }
  }
  // Linear residues may only appear on the lam coordinates, where they are
  // absorbed by an implicit nonnegative slack on the bare product lam_i >= 0.
  for (int l = 0; l < dim; ++l) {
    std::vector<std::pair<int, double>> coeffs;
    for (std::size_t t = 0; t < products.size(); ++t) {
      const double v = products[t].lin(l);
      if (v != 0.0) coeffs.push_back({pv.ids[t], -v});
    }
    if (coeffs.empty()) continue;
    require(l >= n && l < n + m, "linear residue outside the lam block");
    prob.add_scalar_ineq(0.0, coeffs);
  }
  for (std::size_t t = 0; t < products.size(); ++t) {
    require(products[t].constant == 0.0,
            "constant residue in a homogeneous certificate");
  }
  return pv;
}

// Symmetric basis matrix for packed entry (i, j), i <= j.
Matrix sym_basis(int n, int i, int j) {
  Matrix b = Matrix::Zero(n, n);
  b(i, j) = 1.0;
  b(j, i) = 1.0;
  return b;
}

Matrix embed_form(const Matrix& small, int dim) {
  Matrix out = Matrix::Zero(dim, dim);
  out.topLeftCorner(small.rows(), small.cols()) = small;
  return out;
}

Matrix exx(int dim, int n) {
  Matrix out = Matrix::Zero(dim, dim);
  out.topLeftCorner(n, n) = Matrix::Identity(n, n);
  return out;
}

// The homogeneous force bound ||lam|| <= gamma ||x|| extends to nonzero
// offsets only when raising a gap can only shrink the force; that holds
// coordinatewise for diagonal F with c >= 0 and trivially for c = 0.
bool gamma_ball_valid(const Matrix& F, const Vector& c) {
  if (c.size() == 0 || c.isZero(0.0)) return true;
  if (c.minCoeff() < 0.0) return false;
  return F.isDiagonal(0.0);
}

// The decrease-side relaxation products for the chosen representation.
std::vector<QuadProduct> decrease_products(const BmiProgram& bmi) {
  const auto& mdl = bmi.model;
  const int n = mdl.n();
  const int m = mdl.m();
  const bool gamma2 = bmi.opts.representation == GammaRepresentation::Gamma2;
  const int dim = gamma2 ? n + 3 * m : n + 2 * m;
  const bool ball_ok = gamma_ball_valid(mdl.F, mdl.c);

  std::vector<QuadProduct> out =
      gamma_sol_products(mdl.E, mdl.F, mdl.c, dim, "dec");

  if (m > 0 && ball_ok) {
    Matrix ball = Matrix::Zero(dim, dim);
    ball.topLeftCorner(n, n) =
        bmi.bounds.gamma * bmi.bounds.gamma * Matrix::Identity(n, n);
    ball.block(n, n, m, m) = -Matrix::Identity(m, m);
    out.push_back(form_product("dec.tau_gamma", true, ball));
  }

  if (!gamma2) {
    if (m > 0 && ball_ok) {
      Matrix ball = Matrix::Zero(dim, dim);
      ball.topLeftCorner(n, n) =
          bmi.bounds.kappa * bmi.bounds.kappa * Matrix::Identity(n, n);
      ball.block(n + m, n + m, m, m) = -Matrix::Identity(m, m);
      out.push_back(form_product("dec.tau_kappa", true, ball));
    }
    return out;
  }

  // Gamma'(2): complementarity between the base force and the slack rho.
  for (int i = 0; i < m; ++i) {
    out.push_back(product_of(key1("dec.nu", i), false,
                             coordinate(dim, n + i),
                             coordinate(dim, n + 2 * m + i)));
  }

  // With E B = 0 the residual q = E A x + E D lam + F lambar + rho vanishes
  // identically on the solution graph, so every product of q_i with a
  // coordinate (or another q_j) carries a free multiplier. With E B != 0 the
  // residual is only ball-bounded and the ball's constant forces its
  // multiplier to zero, so no products are emitted; the relaxation then
  // ignores q and stays (conservatively) sound.
  if (bmi.eb_zero) {
    const Matrix EA = mdl.E * mdl.A;
    const Matrix ED = mdl.E * mdl.D;
    std::vector<Functional> q(m);
    for (int i = 0; i < m; ++i) {
      q[i].lin = Vector::Zero(dim);
      q[i].lin.head(n) = EA.row(i).transpose();
      q[i].lin.segment(n, m) = ED.row(i).transpose();
      q[i].lin.segment(n + m, m) = mdl.F.row(i).transpose();
      q[i].lin(n + 2 * m + i) = 1.0;
    }
    for (int i = 0; i < m; ++i) {
      for (int l = 0; l < n; ++l) {
        out.push_back(product_of(key2("dec.gx", i, l), false, q[i],
                                 coordinate(dim, l)));
      }
      for (int l = 0; l < m; ++l) {
        out.push_back(product_of(key2("dec.gl", i, l), false, q[i],
                                 coordinate(dim, n + l)));
      }
      for (int l = 0; l < m; ++l) {
        out.push_back(product_of(key2("dec.gr", i, l), false, q[i],
                                 coordinate(dim, n + 2 * m + l)));
      }
      for (int j = i; j < m; ++j) {
        out.push_back(product_of(key2("dec.gq", i, j), false, q[i], q[j]));
      }
    }
  }
  return out;
}

struct StepProblem {
  SdpProblem prob;
  std::map<std::string, int> vars;
  std::vector<std::pair<std::string, int>> multipliers;
  int mu_dec = -1;
};

// Acceptance tolerance for directly evaluated certificates.
constexpr double kEvalTol = 1e-6;

// Step (i): gains fixed, optimize certificate and multipliers.
StepProblem build_certificate_step(const BmiProgram& bmi,
                                   const Controller& ctrl) {
  const auto& mdl = bmi.model;
  const int n = mdl.n();
  const int m = mdl.m();
  const int cdim = n + m;
  const bool gamma2 = bmi.opts.representation == GammaRepresentation::Gamma2;
  const int ddim = gamma2 ? n + 3 * m : n + 2 * m;

  StepProblem sp;
  auto& prob = sp.prob;

  const int pos_block = prob.add_block(cdim);
  const int cap_block = prob.add_block(cdim);
  ReducedBlock dec;
  dec.init(prob, ddim, decrease_null_dirs(bmi));

  prob.block_constant(pos_block, -bmi.opts.eps_pos * exx(cdim, n));
  prob.block_constant(cap_block, bmi.opts.cert_scale_cap *
                                     Matrix::Identity(cdim, cdim));

  // Certificate entries: direct placement in V and extraction of their N
  // coefficient by evaluating build_n on basis certificates.
  PwqCertificate zero;
  zero.P = Matrix::Zero(n, n);
  zero.Q = Matrix::Zero(n, m);
  zero.R = Matrix::Zero(m, m);

  const auto add_cert_var = [&](const std::string& name,
                                const PwqCertificate& basis) {
    const int id = prob.add_var();
    sp.vars[name] = id;
    Matrix v = Matrix::Zero(cdim, cdim);
    v.topLeftCorner(n, n) = basis.P;
    v.topRightCorner(n, m) = basis.Q;
    v.bottomLeftCorner(m, n) = basis.Q.transpose();
    v.bottomRightCorner(m, m) = basis.R;
    prob.block_coeff(pos_block, id, v);
    prob.block_coeff(cap_block, id, -v);
    const NMatrix nb = build_n(mdl, ctrl, basis);
    dec.coeff(id, -embed_form(nb.N, ddim));
    return id;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      PwqCertificate basis = zero;
      basis.P = sym_basis(n, i, j);
      add_cert_var(key2("P", i, j), basis);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      PwqCertificate basis = zero;
      basis.Q(i, j) = 1.0;
      add_cert_var(key2("Q", i, j), basis);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      PwqCertificate basis = zero;
      basis.R = sym_basis(m, i, j);
      add_cert_var(key2("R", i, j), basis);
    }
  }

  // Required decrease is baked in as a constant; the objective maximizes a
  // uniform slack on the whole block instead of the decrease coefficient.
  // Maximizing the coefficient itself leaves the optimal face degenerate
  // (the coefficient touches only the x sub-block) and stalls the solver.
  dec.constant(-bmi.opts.eps_dec * exx(ddim, n));
  sp.mu_dec = prob.add_var(1.0);
  sp.vars["margin"] = sp.mu_dec;
  dec.coeff(sp.mu_dec, Matrix(-dec.U * dec.U.transpose()));

  const auto pos_products = gamma_sol_products(mdl.E, mdl.F, mdl.c, cdim, "pos");
  const auto pv_pos = install_products(prob, pos_block, pos_products, n, m);
  const auto dec_prods = decrease_products(bmi);
  const auto pv_dec = install_products(prob, dec.block, dec_prods, n, m, &dec);
  for (std::size_t t = 0; t < pv_pos.ids.size(); ++t) {
    sp.multipliers.push_back({pv_pos.names[t], pv_pos.ids[t]});
  }
  for (std::size_t t = 0; t < pv_dec.ids.size(); ++t) {
    sp.multipliers.push_back({pv_dec.names[t], pv_dec.ids[t]});
  }
  dec.flush(prob);
  return sp;
}

// Step (ii): certificate fixed, optimize gains and decrease multipliers.
StepProblem build_gain_step(const BmiProgram& bmi, const PwqCertificate& cert) {
  const auto& mdl = bmi.model;
  const int n = mdl.n();
  const int m = mdl.m();
  const int k = mdl.k();
  const bool gamma2 = bmi.opts.representation == GammaRepresentation::Gamma2;
  const int ddim = gamma2 ? n + 3 * m : n + 2 * m;

  StepProblem sp;
  auto& prob = sp.prob;
  ReducedBlock dec;
  dec.init(prob, ddim, decrease_null_dirs(bmi));

  Controller zero_ctrl;
  zero_ctrl.K = Matrix::Zero(k, n);
  zero_ctrl.L = Matrix::Zero(k, m);
  const NMatrix n0 = build_n(mdl, zero_ctrl, cert);
  dec.constant(-embed_form(n0.N, ddim));

  AffineMatrix k_expr, l_expr;
  k_expr.constant = Matrix::Zero(k, n);
  l_expr.constant = Matrix::Zero(k, m);

  const auto& mask = bmi.opts.sparsity_mask;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) {
      if (mask && (*mask)(i, j)) continue;
      const int id = prob.add_var();
      sp.vars[key2("K", i, j)] = id;
      Controller basis = zero_ctrl;
      basis.K(i, j) = 1.0;
      const NMatrix nb = build_n(mdl, basis, cert);
      dec.coeff(id, -embed_form(nb.N - n0.N, ddim));
      Matrix unit = Matrix::Zero(k, n);
      unit(i, j) = 1.0;
      k_expr.terms.push_back({id, unit});
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      const int id = prob.add_var();
      sp.vars[key2("L", i, j)] = id;
      Controller basis = zero_ctrl;
      basis.L(i, j) = 1.0;
      const NMatrix nb = build_n(mdl, basis, cert);
      dec.coeff(id, -embed_form(nb.N - n0.N, ddim));
      Matrix unit = Matrix::Zero(k, m);
      unit(i, j) = 1.0;
      l_expr.terms.push_back({id, unit});
    }
  }

  dec.constant(-bmi.opts.eps_dec * exx(ddim, n));
  sp.mu_dec = prob.add_var(1.0);
  sp.vars["margin"] = sp.mu_dec;
  dec.coeff(sp.mu_dec, Matrix(-dec.U * dec.U.transpose()));

  const auto dec_prods = decrease_products(bmi);
  const auto pv = install_products(prob, dec.block, dec_prods, n, m, &dec);
  for (std::size_t t = 0; t < pv.ids.size(); ++t) {
    sp.multipliers.push_back({pv.names[t], pv.ids[t]});
  }
  dec.flush(prob);

  singular_value_lmi(prob, k_expr, bmi.opts.theta_k);
  if (m > 0) singular_value_lmi(prob, l_expr, bmi.opts.theta_l);
  return sp;
}

Matrix unpack_sym(const SdpSolution& sol,
                  const std::map<std::string, int>& vars, const char* stem,
                  int n) {
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = sol.values(vars.at(key2(stem, i, j)));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

double min_eig(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// A stalled solve whose best iterate is still dual feasible is usable: the
// certificates extracted here rest on dual feasibility of y alone, and the
// objective estimate b'y only errs on the conservative side.
bool usable_solution(const SdpSolution& sol) {
  return sol.status == SdpStatus::Optimal ||
         (sol.status == SdpStatus::MaxIter && sol.kkt_dual <= 1e-6 &&
          sol.kkt_primal <= 1e-3 && sol.duality_gap <= 1e-2);
}

// Worst constraint violation of y across all PSD and scalar blocks,
// evaluated directly on the problem data.
double worst_block_violation(const SdpProblem& prob, const Vector& y) {
  double worst = 0.0;
  for (const auto& blk : prob.blocks()) {
    Matrix g = blk.constant;
    for (const auto& [var, gi] : blk.coeffs) g += y(var) * gi;
    worst = std::max(worst, -min_eig(g));
  }
  return worst;
}

// Direct evaluation of the assembled feasibility system at fixed values.
// The Feasible verdict rests on this check rather than on solver-reported
// optimality, so loosely converged inner solves cannot misreport success.
struct CertEval {
  double pos_eig = 0.0;    // min eig of the positivity block
  double dec_eig = 0.0;    // min eig of the reduced decrease block
  double eq_resid = 0.0;   // worst cross term against the null directions
  double worst_row = 0.0;  // worst scalar row (signs and cancellations)
  bool ok(double tol) const {
    return pos_eig >= -tol && dec_eig >= -tol && worst_row >= -tol &&
           eq_resid <= tol;
  }
};

CertEval evaluate_certificate(const BmiProgram& bmi, const Controller& ctrl,
                              const PwqCertificate& cert,
                              const std::map<std::string, double>& mult) {
  const auto& mdl = bmi.model;
  const int n = mdl.n();
  const int m = mdl.m();
  const int cdim = n + m;
  const bool gamma2 = bmi.opts.representation == GammaRepresentation::Gamma2;
  const int ddim = gamma2 ? n + 3 * m : n + 2 * m;

  const auto value = [&](const std::string& name) {
    const auto it = mult.find(name);
    return it == mult.end() ? 0.0 : it->second;
  };

  CertEval ev;
  ev.worst_row = std::numeric_limits<double>::infinity();
  const auto scalar_rows = [&](const std::vector<QuadProduct>& prods,
                               int dim) {
    for (const auto& p : prods) {
      if (p.nonneg) ev.worst_row = std::min(ev.worst_row, value(p.name));
    }
    for (int l = 0; l < dim; ++l) {
      double row = 0.0;
      bool any = false;
      for (const auto& p : prods) {
        if (p.lin(l) != 0.0) {
          row -= value(p.name) * p.lin(l);
          any = true;
        }
      }
      if (any) ev.worst_row = std::min(ev.worst_row, row);
    }
  };

  Matrix vmat = Matrix::Zero(cdim, cdim);
  vmat.topLeftCorner(n, n) = cert.P;
  vmat.topRightCorner(n, m) = cert.Q;
  vmat.bottomLeftCorner(m, n) = cert.Q.transpose();
  vmat.bottomRightCorner(m, m) = cert.R;
  Matrix gpos = vmat - bmi.opts.eps_pos * exx(cdim, n);
  const auto pos_prods = gamma_sol_products(mdl.E, mdl.F, mdl.c, cdim, "pos");
  for (const auto& p : pos_prods) gpos -= value(p.name) * p.form;
  ev.pos_eig = min_eig(gpos);
  scalar_rows(pos_prods, cdim);

  const NMatrix nm = build_n(mdl, ctrl, cert);
  Matrix gdec = -embed_form(nm.N, ddim) - bmi.opts.eps_dec * exx(ddim, n);
  const auto dec_prods = decrease_products(bmi);
  for (const auto& p : dec_prods) gdec -= value(p.name) * p.form;
  const Matrix null_dirs = decrease_null_dirs(bmi);
  if (null_dirs.cols() == 0) {
    ev.dec_eig = min_eig(gdec);
  } else {
    Eigen::HouseholderQR<Matrix> qr(null_dirs);
    const Matrix q = qr.householderQ() * Matrix::Identity(ddim, ddim);
    const Matrix u = q.rightCols(ddim - null_dirs.cols());
    ev.dec_eig = min_eig(u.transpose() * gdec * u);
    ev.eq_resid = (gdec * null_dirs).cwiseAbs().maxCoeff();
  }
  scalar_rows(dec_prods, ddim);
  return ev;
}

Controller initial_gains(const BmiProgram& bmi) {
  const auto& mdl = bmi.model;
  Controller ctrl;
  ctrl.K = Matrix::Zero(mdl.k(), mdl.n());
  ctrl.L = Matrix::Zero(mdl.k(), mdl.m());
  ctrl.mask = bmi.opts.sparsity_mask;

  if (std::holds_alternative<GivenInit>(bmi.opts.init)) {
    const auto& given = std::get<GivenInit>(bmi.opts.init);
    require(given.K.rows() == mdl.k() && given.K.cols() == mdl.n(),
            "initial K dimension mismatch");
    require(given.L.rows() == mdl.k() && given.L.cols() == mdl.m(),
            "initial L dimension mismatch");
    ctrl.K = given.K;
    ctrl.L = given.L;
  } else if (std::holds_alternative<LqrInit>(bmi.opts.init)) {
    const auto& lqr = std::get<LqrInit>(bmi.opts.init);
    const Matrix Qw = lqr.Qw.size() > 0
                          ? lqr.Qw
                          : Matrix(Matrix::Identity(mdl.n(), mdl.n()));
    const Matrix Rw = lqr.Rw.size() > 0
                          ? lqr.Rw
                          : Matrix(Matrix::Identity(mdl.k(), mdl.k()));
    // Under a column-uniform sparsity mask, design on the submodel that
    // drops the masked states, then embed.
    std::vector<int> keep;
    for (int j = 0; j < mdl.n(); ++j) {
      bool masked = false;
      if (bmi.opts.sparsity_mask) {
        masked = true;
        for (int i = 0; i < mdl.k(); ++i) {
          if (!(*bmi.opts.sparsity_mask)(i, j)) masked = false;
        }
      }
      if (!masked) keep.push_back(j);
    }
    try {
      if (static_cast<int>(keep.size()) == mdl.n()) {
        ctrl.K = lqr_gain(mdl.A, mdl.B, Qw, Rw);
      } else {
        const int nr = static_cast<int>(keep.size());
        Matrix Ar(nr, nr), Br(nr, mdl.k()), Qr(nr, nr);
        for (int a = 0; a < nr; ++a) {
          Br.row(a) = mdl.B.row(keep[a]);
          for (int b = 0; b < nr; ++b) {
            Ar(a, b) = mdl.A(keep[a], keep[b]);
            Qr(a, b) = Qw(keep[a], keep[b]);
          }
        }
        const Matrix Kr = lqr_gain(Ar, Br, Qr, Rw);
        for (int a = 0; a < nr; ++a) ctrl.K.col(keep[a]) = Kr.col(a);
      }
    } catch (const NotStabilizableError&) {
      ctrl.K.setZero();  // alternation starts from zero gains instead
    }
  }
  ctrl.apply_mask();
  return ctrl;
}

}  // namespace

void SynthesisOptions::validate() const {
  require(omega > 0.0, "domain radius must be positive");
  require(theta_k > 0.0 && theta_l > 0.0, "gain caps must be positive");
  require(eps_pos > 0.0 && eps_dec > 0.0, "margins must be positive");
  require(max_alternations >= 1, "need at least one alternation");
  require(cert_scale_cap > 0.0, "certificate cap must be positive");
}

double gamma_bound(const Matrix& E, const Matrix& F) {
  const int m = static_cast<int>(F.rows());
  require(F.cols() == m, "F must be square");
  require(E.rows() == m, "E row count must match F");
  if (m == 0) return 0.0;
  if (m > 12) throw SizeGuardError("gamma_bound enumerates supports; m <= 12");
  require(is_p_matrix(F), "gamma_bound requires a P-matrix");

  double gamma = 0.0;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int s = static_cast<int>(idx.size());
    Matrix Faa(s, s), Ea(s, E.cols());
    for (int a = 0; a < s; ++a) {
      Ea.row(a) = E.row(idx[a]);
      for (int b = 0; b < s; ++b) Faa(a, b) = F(idx[a], idx[b]);
    }
    const Matrix piece = Faa.partialPivLu().solve(Ea);
    gamma = std::max(gamma, spectral_norm(piece));
  }
  return gamma;
}

double kappa_bound(double gamma, double norm_closed_A, double norm_closed_D) {
  require(gamma >= 0.0 && norm_closed_A >= 0.0 && norm_closed_D >= 0.0,
          "kappa inputs must be nonnegative");
  return gamma * (norm_closed_A + gamma * norm_closed_D);
}

std::pair<double, double> sigma_d_bound(const Matrix& E, const Matrix& F,
                                        const Vector& c) {
  const int m = static_cast<int>(F.rows());
  const int n = static_cast<int>(E.cols());
  require(E.rows() == m && F.cols() == m && c.size() == m,
          "sigma_d_bound dimension mismatch");
  if (m == 0) return {0.0, 0.0};
  require(is_p_matrix(F), "sigma_d_bound requires a P-matrix");

  // Homogenized coordinates [x; lam; t]; the certificate block is
  //   sigma*x'x + d*t^2 - lam'lam - sum multipliers * products  PSD.
  const int dim = n + m + 1;
  std::vector<Functional> lam(m), w(m);
  for (int i = 0; i < m; ++i) {
    lam[i] = coordinate(dim, n + i);
    w[i].lin = Vector::Zero(dim);
    w[i].lin.head(n) = E.row(i).transpose();
    w[i].lin.segment(n, m) = F.row(i).transpose();
    w[i].lin(dim - 1) = c(i);
  }
  const Functional t = coordinate(dim, dim - 1);

  std::vector<QuadProduct> products;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      products.push_back(product_of(key2("a", i, j), true, lam[i], lam[j]));
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) {
        products.push_back(product_of(key2("b", i, j), true, lam[i], w[j]));
      }
    }
    products.push_back(product_of(key1("mu", i), false, lam[i], w[i]));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      products.push_back(product_of(key2("ww", i, j), true, w[i], w[j]));
    }
    products.push_back(product_of(key1("lt", i), true, lam[i], t));
    products.push_back(product_of(key1("wt", i), true, w[i], t));
  }

  const auto build = [&](bool min_d, double sigma_cap) {
    SdpProblem prob;
    const int blk = prob.add_block(dim);
    Matrix g0 = Matrix::Zero(dim, dim);
    g0.block(n, n, m, m) = -Matrix::Identity(m, m);
    prob.block_constant(blk, g0);

    const int sigma_var = prob.add_var(min_d ? 0.0 : -1.0);
    const int d_var = prob.add_var(min_d ? -1.0 : 0.0);
    prob.block_coeff(blk, sigma_var, exx(dim, n));
    Matrix et = Matrix::Zero(dim, dim);
    et(dim - 1, dim - 1) = 1.0;
    prob.block_coeff(blk, d_var, et);
    prob.add_scalar_ineq(0.0, {{sigma_var, 1.0}});
    prob.add_scalar_ineq(0.0, {{d_var, 1.0}});
    if (min_d) prob.add_scalar_ineq(sigma_cap, {{sigma_var, -1.0}});

    for (const auto& p : products) {
      const int id = prob.add_var();
      prob.block_coeff(blk, id, -p.form);
      if (p.nonneg) prob.add_scalar_ineq(0.0, {{id, 1.0}});
    }
    return std::make_tuple(std::move(prob), sigma_var, d_var);
  };

  // A loosely converged iterate still certifies a (sigma, d) pair: with the
  // worst block violation eps and multipliers negative by at most eps, the
  // evaluated inequality lam'lam <= sigma x'x + d degrades to a slightly
  // inflated pair, computed here with the Frobenius norms of the product
  // forms bounding the multiplier-error contribution.
  double form_sum = 1.0;
  for (const auto& p : products) form_sum += p.form.norm();
  const auto certify = [&](const SdpProblem& prob, const SdpSolution& sol,
                           int sigma_var, int d_var) {
    double sig = std::max(0.0, sol.values(sigma_var));
    double dd = std::max(0.0, sol.values(d_var));
    const double delta = worst_block_violation(prob, sol.values) * form_sum;
    require(delta < 0.5, "sigma_d_bound certificate too inaccurate");
    sig = (sig + delta) / (1.0 - delta);
    dd = (dd + delta) / (1.0 - delta);
    return std::make_pair(sig, dd);
  };

  auto [prob1, s1, d1] = build(false, 0.0);
  const SdpSolution sol1 = solve_sdp(prob1);
  if (!usable_solution(sol1)) {
    throw SdpFailure(std::string("sigma_d_bound phase 1: ") +
                     to_string(sol1.status) +
                     (sol1.message.empty() ? "" : " (" + sol1.message + ")"));
  }
  auto [sigma, d] = certify(prob1, sol1, s1, d1);

  auto [prob2, s2, d2] = build(true, sigma * (1.0 + 1e-6) + 1e-12);
  const SdpSolution sol2 = solve_sdp(prob2);
  if (usable_solution(sol2)) {
    const auto [sigma2, d2v] = certify(prob2, sol2, s2, d2);
    if (d2v < d && sigma2 <= sigma * (1.0 + 1e-4) + 1e-9) d = d2v;
  }
  return {sigma, d};
}

double b_bound(double theta_EBK, double theta_EBL, double gamma, double sigma,
               double d, double omega) {
  require(theta_EBK >= 0.0 && theta_EBL >= 0.0 && gamma >= 0.0 && d >= 0.0 &&
              omega >= 0.0,
          "b_bound inputs must be nonnegative");
  const double sigma_eff = sigma >= 0.0 ? sigma : gamma * gamma;
  return theta_EBK * omega + theta_EBL * std::sqrt(sigma_eff * omega * omega + d);
}

BmiProgram assemble_bmi(const LcsModel& model, const SynthesisOptions& opts) {
  opts.validate();
  model.validate(/*require_c_nonneg=*/true);
  if (opts.sparsity_mask) {
    require(opts.sparsity_mask->rows() == model.k() &&
                opts.sparsity_mask->cols() == model.n(),
            "sparsity mask must be k x n");
  }

  const int n = model.n();
  const int m = model.m();
  const int k = model.k();

  BmiProgram bmi;
  bmi.model = model;
  bmi.opts = opts;

  if (opts.representation == GammaRepresentation::Gamma1 &&
      m > 0 && model.c.lpNorm<Eigen::Infinity>() > 0.0) {
    throw UnsupportedRepresentationError(
        "the homogeneous representation requires c = 0");
  }

  const Matrix EB = model.E * model.B;
  bmi.eb_zero = m == 0 || EB.lpNorm<Eigen::Infinity>() <=
                              1e-12 * (1.0 + spectral_norm(model.E) *
                                                 spectral_norm(model.B));

  bmi.bounds.gamma = gamma_bound(model.E, model.F);
  bmi.bounds.kappa = kappa_bound(
      bmi.bounds.gamma,
      spectral_norm(model.A) + opts.theta_k * spectral_norm(model.B),
      spectral_norm(model.D) + opts.theta_l * spectral_norm(model.B));
  if (m > 0) {
    std::tie(bmi.bounds.sigma, bmi.bounds.d) =
        sigma_d_bound(model.E, model.F, model.c);
  }
  if (!bmi.eb_zero) {
    const double ebn = spectral_norm(EB);
    bmi.bounds.b = b_bound(ebn * opts.theta_k, ebn * opts.theta_l,
                           bmi.bounds.gamma, bmi.bounds.sigma, bmi.bounds.d,
                           opts.omega);
  }

  bmi.num_p_vars = n * (n + 1) / 2;
  bmi.num_q_vars = n * m;
  bmi.num_r_vars = m * (m + 1) / 2;
  int masked = 0;
  if (opts.sparsity_mask) masked = static_cast<int>(opts.sparsity_mask->count());
  bmi.num_k_vars = k * n - masked;
  bmi.num_l_vars = k * m;
  bmi.num_pos_multipliers = static_cast<int>(
      gamma_sol_products(model.E, model.F, model.c, n + m, "pos").size());
  bmi.num_dec_multipliers = static_cast<int>(decrease_products(bmi).size());
  bmi.pos_block_dim = n + m;
  bmi.dec_block_dim =
      opts.representation == GammaRepresentation::Gamma2 ? n + 3 * m
                                                         : n + 2 * m;
  return bmi;
}

SynthesisResult solve_alternating(const BmiProgram& bmi) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto& opts = bmi.opts;

  SynthesisResult res;
  res.bounds = bmi.bounds;
  res.controller = initial_gains(bmi);
  res.status = SynthesisStatus::Stalled;

  const auto usable = [](const SdpSolution& sol) {
    return usable_solution(sol);
  };

  const auto solve_inner = [&](const SdpProblem& prob, const char* what,
                               int round) {
    SdpSolution sol = solve_sdp(prob, opts.sdp);
    if (sol.status != SdpStatus::Optimal && !usable(sol)) {
      SdpOptions relaxed = opts.sdp;
      relaxed.gap_tol = std::max(relaxed.gap_tol, 1e-6);
      relaxed.feas_tol = std::max(relaxed.feas_tol, 1e-7);
      relaxed.max_iters = std::max(relaxed.max_iters, 300);
      sol = solve_sdp(prob, relaxed);
    }
    if (sol.status == SdpStatus::NumericFailure) {
      std::ostringstream os;
      os << what << " failed at alternation " << round << ": " << sol.message;
      throw SdpFailure(os.str());
    }
    if (opts.verbose) {
      std::cerr << "  " << what << " round " << round << ": "
                << to_string(sol.status) << " gap " << sol.duality_gap
                << " kkt_p " << sol.kkt_primal << " kkt_d " << sol.kkt_dual
                << " iters " << sol.iterations << "\n";
    }
    return sol;
  };

  const auto record_multipliers = [&](const StepProblem& sp,
                                      const SdpSolution& sol) {
    for (const auto& [name, id] : sp.multipliers) {
      double v = sol.values(id);
      if (v < 0.0 && v > -1e-8) v = 0.0;  // boundary rounding on signs
      res.multipliers[name] = v;
    }
  };

  bool have_cert = false;
  double mu_best = -std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int round = 1; round <= opts.max_alternations; ++round) {
    res.iterations = round;

    StepProblem si = build_certificate_step(bmi, res.controller);
    const SdpSolution sol_i = solve_inner(si.prob, "certificate step", round);
    if (!usable(sol_i)) {
      res.status = (round == 1 && sol_i.status == SdpStatus::Infeasible)
                       ? SynthesisStatus::Infeasible
                       : SynthesisStatus::Stalled;
      res.message = std::string("certificate step: ") + to_string(sol_i.status) +
                    (sol_i.message.empty() ? "" : " (" + sol_i.message + ")");
      break;
    }
    res.certificate.P = unpack_sym(sol_i, si.vars, "P", bmi.model.n());
    res.certificate.R = unpack_sym(sol_i, si.vars, "R", bmi.model.m());
    res.certificate.Q = Matrix::Zero(bmi.model.n(), bmi.model.m());
    for (int i = 0; i < bmi.model.n(); ++i) {
      for (int j = 0; j < bmi.model.m(); ++j) {
        res.certificate.Q(i, j) = sol_i.values(si.vars.at(key2("Q", i, j)));
      }
    }
    have_cert = true;
    record_multipliers(si, sol_i);
    const double mu_i = opts.eps_dec + sol_i.values(si.mu_dec);
    mu_best = std::max(mu_best, mu_i);
    const CertEval ev_i = evaluate_certificate(bmi, res.controller,
                                               res.certificate,
                                               res.multipliers);
    if (opts.verbose) {
      std::cerr << "alternation " << round << " certificate margin " << mu_i
                << " (evaluated dec " << ev_i.dec_eig << ", pos "
                << ev_i.pos_eig << ")\n";
    }
    if (ev_i.ok(kEvalTol)) {
      res.status = SynthesisStatus::Feasible;
      res.margin_dec = opts.eps_dec + std::max(0.0, ev_i.dec_eig);
      res.margin_pos = opts.eps_pos + std::max(0.0, ev_i.pos_eig);
      break;
    }

    StepProblem sg = build_gain_step(bmi, res.certificate);
    const SdpSolution sol_g = solve_inner(sg.prob, "gain step", round);
    if (!usable(sol_g)) {
      res.status = (round == 1 && sol_g.status == SdpStatus::Infeasible)
                       ? SynthesisStatus::Infeasible
                       : SynthesisStatus::Stalled;
      res.message = std::string("gain step: ") + to_string(sol_g.status) +
                    (sol_g.message.empty() ? "" : " (" + sol_g.message + ")");
      break;
    }
    for (int i = 0; i < bmi.model.k(); ++i) {
      for (int j = 0; j < bmi.model.n(); ++j) {
        const auto it = sg.vars.find(key2("K", i, j));
        res.controller.K(i, j) = it == sg.vars.end() ? 0.0
                                                     : sol_g.values(it->second);
      }
      for (int j = 0; j < bmi.model.m(); ++j) {
        res.controller.L(i, j) = sol_g.values(sg.vars.at(key2("L", i, j)));
      }
    }
    res.controller.apply_mask();
    record_multipliers(sg, sol_g);
    const double mu_g = opts.eps_dec + sol_g.values(sg.mu_dec);
    if (opts.verbose) {
      std::cerr << "alternation " << round << " gain margin " << mu_g << "\n";
    }
    if (mu_g >= opts.eps_dec) {
      // Re-certify so the stored certificate matches the final gains.
      StepProblem sf = build_certificate_step(bmi, res.controller);
      const SdpSolution sol_f = solve_inner(sf.prob, "final certificate", round);
      if (usable(sol_f)) {
        PwqCertificate cand;
        cand.P = unpack_sym(sol_f, sf.vars, "P", bmi.model.n());
        cand.R = unpack_sym(sol_f, sf.vars, "R", bmi.model.m());
        cand.Q = Matrix::Zero(bmi.model.n(), bmi.model.m());
        for (int i = 0; i < bmi.model.n(); ++i) {
          for (int j = 0; j < bmi.model.m(); ++j) {
            cand.Q(i, j) = sol_f.values(sf.vars.at(key2("Q", i, j)));
          }
        }
        record_multipliers(sf, sol_f);
        const CertEval ev_f = evaluate_certificate(bmi, res.controller, cand,
                                                   res.multipliers);
        if (ev_f.ok(kEvalTol)) {
          res.certificate = cand;
          res.status = SynthesisStatus::Feasible;
          res.margin_dec = opts.eps_dec + std::max(0.0, ev_f.dec_eig);
          res.margin_pos = opts.eps_pos + std::max(0.0, ev_f.pos_eig);
          break;
        }
      }
      // Certification at the new gains fell short; keep alternating.
    }
    if (mu_g - mu_best < 1e-9) {
      if (++stall >= 3) {
        res.status = SynthesisStatus::Stalled;
        res.message = "decrease margin stalled";
        res.margin_dec = std::max(mu_best, mu_g);
        break;
      }
    } else {
      stall = 0;
    }
    mu_best = std::max(mu_best, mu_g);
    res.margin_dec = mu_best;
    if (round == opts.max_alternations) {
      res.status = SynthesisStatus::Stalled;
      res.message = "alternation limit reached";
    }
  }

  if (!have_cert) {
    res.certificate.P = Matrix::Zero(bmi.model.n(), bmi.model.n());
    res.certificate.Q = Matrix::Zero(bmi.model.n(), bmi.model.m());
    res.certificate.R = Matrix::Zero(bmi.model.m(), bmi.model.m());
  }
  res.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return res;
}

const char* to_string(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::Feasible: return "Feasible";
    case SynthesisStatus::Infeasible: return "Infeasible";
    case SynthesisStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

const char* to_string(GammaRepresentation repr) {
  switch (repr) {
    case GammaRepresentation::Gamma1: return "Gamma1";
    case GammaRepresentation::Gamma2: return "Gamma2";
  }
  return "Unknown";
}

}  // namespace lcsctl
