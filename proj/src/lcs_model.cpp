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

#include "lcsctl/lcs_model.hpp"

#include <cmath>

namespace lcsctl {

namespace {

bool finite_and_bounded(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergenceGuard) {
      return false;
    }
  }
  return true;
}

}  // namespace

void LcsModel::validate(bool require_c_nonneg, std::string* warning) const {
  const int nn = n();
  const int kk = k();
  const int mm = m();
  require(A.rows() == nn && A.cols() == nn, "A must be square n x n");
  require(B.rows() == nn && B.cols() == kk, "B must be n x k");
  require(D.rows() == nn && D.cols() == mm, "D must be n x m");
  require(E.rows() == mm && E.cols() == nn, "E must be m x n");
  require(F.rows() == mm && F.cols() == mm, "F must be m x m");
  require(c.size() == mm, "c must have m entries");
  require(names.empty() || static_cast<int>(names.size()) == nn,
          "names must be empty or have n entries");
  if (mm > 0 && !is_p_matrix(F)) {
    throw NotPMatrixError("model matrix F is not a P-matrix");
  }
  if ((c.array() < 0.0).any()) {
    if (require_c_nonneg) {
      throw DimensionError("model requires c >= 0 for synthesis");
    }
    if (warning != nullptr) {
      *warning = "model has c with negative entries; origin may not be an "
                 "equilibrium";
    }
  }
}

Vector LcsModel::contact_force_at(const Vector& x) const {
  return contact_force(E, F, c, x);
}

void Controller::apply_mask() {
  if (!mask) return;
  require(mask->rows() == K.rows() && mask->cols() == K.cols(),
          "mask dimensions must match K");
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if ((*mask)(i, j)) K(i, j) = 0.0;
    }
  }
}

bool Controller::mask_respected() const {
  if (!mask) return true;
  if (mask->rows() != K.rows() || mask->cols() != K.cols()) return false;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if ((*mask)(i, j) && K(i, j) != 0.0) return false;
    }
  }
  return true;
}

Vector control_input(const Controller& ctrl, const Vector& x,
                     const Vector& lambda) {
  require(ctrl.K.cols() == x.size(), "controller K width must match state");
  require(ctrl.L.cols() == lambda.size(),
          "controller L width must match force");
  require(ctrl.K.rows() == ctrl.L.rows(), "K and L must share row count");
  return ctrl.K * x + ctrl.L * lambda;
}

Vector closed_loop_rhs(const LcsModel& model, const Controller& ctrl,
                       const Vector& x) {
  const Vector lambda = model.contact_force_at(x);
  const Vector u = control_input(ctrl, x, lambda);
  return model.A * x + model.B * u + model.D * lambda;
}

Trajectory simulate(const LcsModel& model, const Controller& ctrl,
                    const Vector& x0, double t_final, double h) {
  require(h > 0.0, "step size must be positive");
  require(t_final > 0.0, "horizon must be positive");
  require(x0.size() == model.n(), "initial state dimension mismatch");

  const auto rhs = [&](const Vector& x) {
    return closed_loop_rhs(model, ctrl, x);
  };
  const int steps = static_cast<int>(std::ceil(t_final / h - 1e-12));

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.forces.reserve(steps + 1);
  traj.inputs.reserve(steps + 1);
  traj.comp_residuals.reserve(steps + 1);

  const auto record = [&](double t, const Vector& x) {
    const Vector lam = model.contact_force_at(x);
    const Vector slack = model.E * x + model.F * lam + model.c;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.forces.push_back(lam);
    traj.inputs.push_back(control_input(ctrl, x, lam));
    traj.comp_residuals.push_back(std::abs(lam.dot(slack)));
  };

  Vector x = x0;
  record(0.0, x);
  if (!finite_and_bounded(x)) {
    traj.diverged = true;
    return traj;
  }
  for (int step = 0; step < steps; ++step) {
    const double dt = std::min(h, t_final - step * h);
    try {
      const Vector k1 = rhs(x);
      const Vector k2 = rhs(x + 0.5 * dt * k1);
      const Vector k3 = rhs(x + 0.5 * dt * k2);
      const Vector k4 = rhs(x + dt * k3);
      x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const NotPMatrixError&) {
      // An LCP solve only fails here when a stage state has overflowed.
      traj.diverged = true;
      return traj;
    }
    if (!finite_and_bounded(x)) {
      traj.diverged = true;
      return traj;
    }
    record(std::min((step + 1) * h, t_final), x);
  }
  return traj;
}

bool equilibrium_check(const LcsModel& model, const Controller& ctrl,
                       double tol) {
  const Vector xdot = closed_loop_rhs(model, ctrl, Vector::Zero(model.n()));
  return xdot.lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace lcsctl
