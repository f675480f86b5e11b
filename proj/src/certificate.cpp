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

#include "lcsctl/certificate.hpp"

#include <cmath>

#include "lcsctl/rng.hpp"

namespace lcsctl {

void PwqCertificate::validate(const LcsModel* model, double sym_tol) const {
  require(P.rows() == P.cols(), "P must be square");
  require(R.rows() == R.cols(), "R must be square");
  require(Q.rows() == P.rows() && Q.cols() == R.rows(),
          "Q must be n x m");
  const double p_scale = std::max(1.0, P.norm());
  const double r_scale = std::max(1.0, R.norm());
  require((P - P.transpose()).norm() <= sym_tol * p_scale,
          "P must be symmetric");
  require((R - R.transpose()).norm() <= sym_tol * r_scale,
          "R must be symmetric");
  if (model != nullptr) {
    require(n() == model->n() && m() == model->m(),
            "certificate dimensions must match the model");
  }
}

double eval_v(const PwqCertificate& cert, const Vector& x,
              const Vector& lambda) {
  require(x.size() == cert.n(), "state dimension mismatch");
  require(lambda.size() == cert.m(), "force dimension mismatch");
  return x.dot(cert.P * x) + 2.0 * x.dot(cert.Q * lambda) +
         lambda.dot(cert.R * lambda);
}

NMatrix build_n(const LcsModel& model, const Controller& ctrl,
                const PwqCertificate& cert) {
  const int n = model.n();
  const int m = model.m();
  require(cert.n() == n && cert.m() == m,
          "certificate dimensions must match the model");
  require(ctrl.K.rows() == model.k() && ctrl.K.cols() == n,
          "controller K dimension mismatch");
  require(ctrl.L.rows() == model.k() && ctrl.L.cols() == m,
          "controller L dimension mismatch");

  const Matrix Acl = model.A + model.B * ctrl.K;
  const Matrix Dcl = model.D + model.B * ctrl.L;

  NMatrix out;
  out.n = n;
  out.m = m;
  out.N = Matrix::Zero(n + 2 * m, n + 2 * m);
  out.N.block(0, 0, n, n) = Acl.transpose() * cert.P + cert.P * Acl;
  out.N.block(0, n, n, m) = cert.P * Dcl + Acl.transpose() * cert.Q;
  out.N.block(n, 0, m, n) = out.N.block(0, n, n, m).transpose();
  out.N.block(n, n, m, m) =
      Dcl.transpose() * cert.Q + cert.Q.transpose() * Dcl;
  out.N.block(0, n + m, n, m) = cert.Q;
  out.N.block(n + m, 0, m, n) = cert.Q.transpose();
  out.N.block(n, n + m, m, m) = cert.R;
  out.N.block(n + m, n, m, m) = cert.R.transpose();
  return out;
}

double eval_vdot(const LcsModel& model, const Controller& ctrl,
                 const PwqCertificate& cert, const Vector& x) {
  const Vector lambda = model.contact_force_at(x);
  const Vector xdot = closed_loop_rhs(model, ctrl, x);
  const Vector lambar =
      directional_derivative(model.E, model.F, model.c, x, xdot);
  // Direct expansion of the derivative; build_n must reproduce it.
  return 2.0 * x.dot(cert.P * xdot) + 2.0 * xdot.dot(cert.Q * lambda) +
         2.0 * x.dot(cert.Q * lambar) + 2.0 * lambda.dot(cert.R * lambar);
}

VerificationReport verify_sampled(const LcsModel& model, const Controller& ctrl,
                                  const PwqCertificate& cert, double omega,
                                  int n_samples, uint64_t seed, double eps_pos,
                                  double eps_dec) {
  require(omega > 0.0, "domain radius must be positive");
  require(n_samples >= 0, "sample count must be nonnegative");
  cert.validate(&model);

  VerificationReport report;
  report.samples = n_samples;
  if (n_samples == 0) return report;

  report.worst_pos_margin = std::numeric_limits<double>::infinity();
  report.worst_dec_margin = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  const int max_witnesses = 32;
  for (int i = 0; i < n_samples; ++i) {
    Vector x = rng.ball(model.n(), omega);
    if (x.norm() < 1e-12) continue;
    const double xsq = x.squaredNorm();
    const Vector lambda = model.contact_force_at(x);
    const double v = eval_v(cert, x, lambda);
    const double vdot = eval_vdot(model, ctrl, cert, x);

    const double pos_margin = v - eps_pos * xsq;
    const double dec_margin = -vdot - eps_dec * xsq;
    report.worst_pos_margin = std::min(report.worst_pos_margin, pos_margin);
    report.worst_dec_margin = std::min(report.worst_dec_margin, dec_margin);

    const bool bad_pos = pos_margin < 0.0;
    const bool bad_dec = dec_margin < 0.0;
    if (bad_pos) ++report.violations_pos;
    if (bad_dec) ++report.violations_dec;
    if ((bad_pos || bad_dec) &&
        static_cast<int>(report.witness_points.size()) < max_witnesses) {
      WitnessPoint w;
      w.x = x;
      w.v = v;
      w.vdot = vdot;
      w.violates_pos = bad_pos;
      w.violates_dec = bad_dec;
      report.witness_points.push_back(std::move(w));
    }
  }
  return report;
}

double monotonicity_along_trajectory(const Trajectory& traj,
                                     const PwqCertificate& cert,
                                     const LcsModel& model) {
  cert.validate(&model);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
    const double v0 = eval_v(cert, traj.states[i], traj.forces[i]);
    const double v1 = eval_v(cert, traj.states[i + 1], traj.forces[i + 1]);
    worst = std::max(worst, v1 - v0);
  }
  return worst;
}

}  // namespace lcsctl
