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

#include "lcsctl/benchmarks.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "lcsctl/lcp.hpp"
#include "lcsctl/riccati.hpp"
#include "lcsctl/rng.hpp"

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

// Plant-side contact solve: LCP with the compliance matrix F and the gap
// offset evaluated on the (possibly nonlinear) plant configuration.
Vector gap_force(const Matrix& F, const Vector& gap0) {
  if (gap0.size() == 0) return Vector(0);
  for (Eigen::Index i = 0; i < gap0.size(); ++i) {
    if (!std::isfinite(gap0(i))) {
      throw NotPMatrixError("non-finite gap offset");
    }
  }
  LcpInstance inst;
  inst.F = F;
  inst.w = gap0;
  const LcpSolution sol = solve_lemke(inst);
  if (sol.status != LcpStatus::Solved) {
    throw NotASolutionError("plant contact LCP did not terminate");
  }
  return sol.lambda;
}

}  // namespace

void BenchmarkSpec::validate() const {
  lcs.validate();
  require(static_cast<int>(ic_ranges.size()) == lcs.n(),
          "IC range per state coordinate required");
  for (const auto& [lo, hi] : ic_ranges) {
    require(lo <= hi, "IC range must be nonempty");
  }
  require(trials > 0, "trial count must be positive");
  require(t_final > 0.0 && step > 0.0, "horizon and step must be positive");
  require(success_eps > 0.0, "success threshold must be positive");
  require(static_cast<bool>(plant_gap0) && static_cast<bool>(plant_force) &&
              static_cast<bool>(nonlinear_rhs),
          "evaluation plant functions must be set");
}

BenchmarkSpec cartpole_spec() {
  // Cart position x1, pole angle x2, their rates x3, x4; one cart force
  // input; walls at +/- d acting on the pole tip through soft springs.
  const double g = 9.81;
  const double mp = 0.5;
  const double mc = 1.0;
  const double len = 0.5;
  const double d = 0.1;
  const double k1 = 10.0;
  const double k2 = 10.0;

  BenchmarkSpec spec;
  spec.name = BenchmarkName::CartPoleSoftWalls;
  spec.label = "cartpole";

  LcsModel& m = spec.lcs;
  m.A = Matrix::Zero(4, 4);
  m.A(0, 2) = 1.0;
  m.A(1, 3) = 1.0;
  m.A(2, 1) = g * mp / mc;
  m.A(3, 1) = g * (mc + mp) / (len * mc);
  m.B = Matrix::Zero(4, 1);
  m.B(2, 0) = 1.0 / mc;
  m.B(3, 0) = 1.0 / (len * mc);
  m.D = Matrix::Zero(4, 2);
  m.D(3, 0) = 1.0 / (len * mp);
  m.D(3, 1) = -1.0 / (len * mp);
  m.E = Matrix::Zero(2, 4);
  m.E.row(0) << -1.0, len, 0.0, 0.0;
  m.E.row(1) << 1.0, -len, 0.0, 0.0;
  m.F = Matrix::Zero(2, 2);
  m.F(0, 0) = 1.0 / k1;
  m.F(1, 1) = 1.0 / k2;
  m.c = Vector::Constant(2, d);
  m.names = {"cart_pos", "pole_angle", "cart_vel", "pole_rate"};

  const Matrix Fc = m.F;
  // Pole tip horizontal position; the walls read it instead of l*x2 - x1.
  const auto tip = [len](const Vector& x) {
    return x(0) - len * std::sin(x(1));
  };
  spec.plant_gap0 = [tip, d](const Vector& x) {
    Vector w0(2);
    const double p = tip(x);
    w0 << d - p, d + p;
    return w0;
  };
  spec.plant_force = [Fc, gap0 = spec.plant_gap0](const Vector& x) {
    return gap_force(Fc, gap0(x));
  };
  spec.nonlinear_rhs = [=, force = spec.plant_force](const Vector& x,
                                                     const Vector& u) {
    const Vector lam = force(x);
    const double th = x(1);
    const double thd = x(3);
    const double fp = lam(1) - lam(0);  // net tip force, +x direction
    Matrix mass(2, 2);
    mass << mc + mp, -mp * len * std::cos(th),
        -mp * len * std::cos(th), mp * len * len;
    Vector rhs(2);
    rhs << u(0) + fp - mp * len * std::sin(th) * thd * thd,
        -fp * len * std::cos(th) + mp * g * len * std::sin(th);
    const Vector qdd = mass.partialPivLu().solve(rhs);
    Vector xdot(4);
    xdot << x(2), x(3), qdd(0), qdd(1);
    return xdot;
  };

  // "10 x1(0), x3(0), x4(0) ~ U[-1,1]" with the pole starting upright.
  spec.ic_ranges = {{-0.1, 0.1}, {0.0, 0.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  spec.trials = 100;
  spec.lqr_Qw = 10.0 * Matrix::Identity(4, 4);
  spec.lqr_Rw = Matrix::Identity(1, 1);

  spec.synth.init = LqrInit{spec.lqr_Qw, spec.lqr_Rw};
  return spec;
}

BenchmarkSpec three_carts_spec() {
  // Carts x1 (with pole x4), x2 (spring cart, unobserved), x3; inputs on
  // the outer carts only; state ordering (positions, velocities).
  const double g = 9.81;
  const double m1 = 1.0;
  const double m2 = 1.0;
  const double m3 = 1.0;
  const double mp = 1.5;
  const double len = 0.5;
  const double k1 = 100.0;
  const double k2 = 100.0;

  BenchmarkSpec spec;
  spec.name = BenchmarkName::ThreeCarts;
  spec.label = "three_carts";

  LcsModel& m = spec.lcs;
  m.A = Matrix::Zero(8, 8);
  m.A.topRightCorner(4, 4) = Matrix::Identity(4, 4);
  m.A(4, 3) = g * mp / m1;
  m.A(7, 3) = g * (m1 + mp) / (m1 * len);
  m.B = Matrix::Zero(8, 2);
  m.B(4, 0) = 1.0 / m1;
  m.B(6, 1) = 1.0 / m3;
  m.B(7, 0) = 1.0 / (m1 * len);
  m.D = Matrix::Zero(8, 2);
  m.D(4, 0) = -1.0 / m1;
  m.D(5, 0) = 1.0 / m2;
  m.D(5, 1) = -1.0 / m2;
  m.D(6, 1) = 1.0 / m3;
  m.D(7, 0) = -1.0 / (m1 * len);
  m.E = Matrix::Zero(2, 8);
  m.E(0, 0) = -1.0;
  m.E(0, 1) = 1.0;
  m.E(1, 1) = -1.0;
  m.E(1, 2) = 1.0;
  m.F = Matrix::Zero(2, 2);
  m.F(0, 0) = 1.0 / k1;
  m.F(1, 1) = 1.0 / k2;
  m.c = Vector::Zero(2);
  m.names = {"cart1_pos", "cart2_pos", "cart3_pos", "pole_angle",
             "cart1_vel", "cart2_vel", "cart3_vel", "pole_rate"};

  // The paper evaluates this example on the LCS itself.
  spec.lcs_plant = true;
  const LcsModel lcs_copy = m;
  spec.plant_gap0 = [lcs_copy](const Vector& x) {
    return Vector(lcs_copy.E * x + lcs_copy.c);
  };
  spec.plant_force = [lcs_copy](const Vector& x) {
    return lcs_copy.contact_force_at(x);
  };
  spec.nonlinear_rhs = [lcs_copy](const Vector& x, const Vector& u) {
    const Vector lam = lcs_copy.contact_force_at(x);
    return Vector(lcs_copy.A * x + lcs_copy.B * u + lcs_copy.D * lam);
  };

  // IC ranges are a documented choice; the source experiment prints none.
  spec.ic_ranges.assign(8, {-0.1, 0.1});
  spec.trials = 100;
  spec.has_lqr_baseline = false;  // contact-free (A, B) is not stabilizable

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(2, 8);
  mask.setConstant(false);
  mask(0, 1) = mask(1, 1) = true;  // x2 unobserved
  mask(0, 5) = mask(1, 5) = true;  // x2 rate unobserved
  spec.synth.sparsity_mask = mask;
  spec.synth.init = LqrInit{};
  return spec;
}

BenchmarkSpec acrobot_spec() {
  // Absolute angles from upright: x1 shoulder, x2 second rod, rates x3, x4;
  // elbow torque input; soft joint limits at |x1| <= d. Uniform rods.
  const double g = 9.81;
  const double m1 = 0.5;
  const double m2 = 1.0;
  const double l1 = 0.5;
  const double l2 = 1.0;
  const double k = 1.0;
  const double d = 1.0;

  const double a1 = m1 * l1 * l1 / 3.0 + m2 * l1 * l1;
  const double a2 = m2 * l2 * l2 / 3.0;
  const double h = m2 * l1 * l2 / 2.0;
  const double g1 = (m1 / 2.0 + m2) * l1 * g;
  const double g2 = m2 * g * l2 / 2.0;

  BenchmarkSpec spec;
  spec.name = BenchmarkName::AcrobotJointLimits;
  spec.label = "acrobot";

  Matrix mass0(2, 2);
  mass0 << a1, h, h, a2;
  const Matrix mass0_inv = mass0.inverse();
  Matrix jt(2, 2);
  jt << -1.0, 1.0, 0.0, 0.0;

  LcsModel& m = spec.lcs;
  m.A = Matrix::Zero(4, 4);
  m.A.topRightCorner(2, 2) = Matrix::Identity(2, 2);
  Matrix grav(2, 2);
  grav << g1, 0.0, 0.0, g2;
  m.A.bottomLeftCorner(2, 2) = mass0_inv * grav;
  m.B = Matrix::Zero(4, 1);
  Vector elbow(2);
  elbow << -1.0, 1.0;
  m.B.bottomRows(2) = mass0_inv * elbow;
  m.D = Matrix::Zero(4, 2);
  m.D.bottomRows(2) = mass0_inv * jt;
  m.E = Matrix::Zero(2, 4);
  m.E(0, 0) = -1.0;
  m.E(1, 0) = 1.0;
  m.F = Matrix::Identity(2, 2) / k;
  m.c = Vector::Constant(2, d);
  m.names = {"shoulder", "elbow_abs", "shoulder_rate", "elbow_rate"};

  const Matrix Fc = m.F;
  spec.plant_gap0 = [d](const Vector& x) {
    Vector w0(2);
    w0 << d - x(0), d + x(0);  // joint limits read x1 exactly
    return w0;
  };
  spec.plant_force = [Fc, gap0 = spec.plant_gap0](const Vector& x) {
    return gap_force(Fc, gap0(x));
  };
  spec.nonlinear_rhs = [=, force = spec.plant_force](const Vector& x,
                                                     const Vector& u) {
    const Vector lam = force(x);
    const double s1 = std::sin(x(0));
    const double s2 = std::sin(x(1));
    const double c12 = std::cos(x(0) - x(1));
    const double s12 = std::sin(x(0) - x(1));
    Matrix mass(2, 2);
    mass << a1, h * c12, h * c12, a2;
    Vector rhs(2);
    rhs << -h * s12 * x(3) * x(3) + g1 * s1 - u(0) - lam(0) + lam(1),
        h * s12 * x(2) * x(2) + g2 * s2 + u(0);
    const Vector qdd = mass.partialPivLu().solve(rhs);
    Vector xdot(4);
    xdot << x(2), x(3), qdd(0), qdd(1);
    return xdot;
  };

  spec.ic_ranges = {{-0.05, 0.05}, {-0.05, 0.05}, {-0.2, 0.2}, {-0.1, 0.1}};
  spec.trials = 100;
  spec.lqr_Qw = 100.0 * Matrix::Identity(4, 4);
  spec.lqr_Rw = Matrix::Identity(1, 1);

  spec.synth.init = LqrInit{spec.lqr_Qw, spec.lqr_Rw};
  return spec;
}

BenchmarkSpec benchmark_by_name(const std::string& label) {
  if (label == "cartpole") return cartpole_spec();
  if (label == "three_carts") return three_carts_spec();
  if (label == "acrobot") return acrobot_spec();
  throw IoError("unknown benchmark '" + label +
                "'; valid names: cartpole, three_carts, acrobot");
}

std::vector<std::string> benchmark_names() {
  return {"cartpole", "three_carts", "acrobot"};
}

Controller lqr_baseline(const BenchmarkSpec& spec) {
  require(spec.has_lqr_baseline, "benchmark has no LQR baseline");
  Controller ctrl;
  ctrl.K = lqr_gain(spec.lcs.A, spec.lcs.B, spec.lqr_Qw, spec.lqr_Rw);
  ctrl.L = Matrix::Zero(spec.lcs.k(), spec.lcs.m());
  return ctrl;
}

Vector initial_condition(const BenchmarkSpec& spec, std::uint64_t seed,
                         int trial) {
  Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(trial)));
  Vector x0(spec.lcs.n());
  for (int i = 0; i < spec.lcs.n(); ++i) {
    x0(i) = rng.uniform(spec.ic_ranges[i].first, spec.ic_ranges[i].second);
  }
  return x0;
}

Trajectory simulate_plant(const BenchmarkSpec& spec, const Controller& ctrl,
                          const Vector& x0, double t_final, double h) {
  require(h > 0.0, "step size must be positive");
  require(t_final > 0.0, "horizon must be positive");
  require(x0.size() == spec.lcs.n(), "initial state dimension mismatch");

  const Matrix& F = spec.lcs.F;
  const auto rhs = [&](const Vector& x) {
    const Vector lam = spec.plant_force(x);
    return spec.nonlinear_rhs(x, control_input(ctrl, x, lam));
  };
  const int steps = static_cast<int>(std::ceil(t_final / h - 1e-12));

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.forces.reserve(steps + 1);
  traj.inputs.reserve(steps + 1);
  traj.comp_residuals.reserve(steps + 1);

  const auto record = [&](double t, const Vector& x) {
    const Vector lam = spec.plant_force(x);
    const Vector slack = F * lam + spec.plant_gap0(x);
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
      // A stage LCP only fails once a stage state has overflowed.
      traj.diverged = true;
      return traj;
    } catch (const NotASolutionError&) {
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

int harness_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("LCSCTL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

MonteCarloReport monte_carlo(const BenchmarkSpec& spec, const Controller& ctrl,
                             const std::string& controller_name,
                             std::uint64_t seed) {
  spec.validate();
  require(ctrl.K.rows() == spec.lcs.k() && ctrl.K.cols() == spec.lcs.n(),
          "controller K must be k x n");
  require(ctrl.L.rows() == spec.lcs.k() && ctrl.L.cols() == spec.lcs.m(),
          "controller L must be k x m");

  MonteCarloReport report;
  report.controller_name = controller_name;
  report.trials = spec.trials;
  report.seed = seed;
  report.terminal_norms.assign(spec.trials,
                               std::numeric_limits<double>::infinity());
  report.trial_success.assign(spec.trials, false);
  report.trial_diverged.assign(spec.trials, false);
  report.initial_conditions.resize(spec.trials);

  const auto run_trial = [&](int trial) {
    const Vector x0 = initial_condition(spec, seed, trial);
    report.initial_conditions[trial] = x0;
    bool diverged = false;
    double terminal = std::numeric_limits<double>::infinity();
    try {
      const Trajectory traj =
          simulate_plant(spec, ctrl, x0, spec.t_final, spec.step);
      diverged = traj.diverged;
      if (!diverged) terminal = traj.terminal_state().norm();
    } catch (const std::exception&) {
      diverged = true;  // flagged and counted as non-success
    }
    report.trial_diverged[trial] = diverged;
    report.terminal_norms[trial] = terminal;
    report.trial_success[trial] = !diverged && terminal < spec.success_eps;
  };

  const int workers = std::min(harness_threads(), spec.trials);
  if (workers <= 1) {
    for (int t = 0; t < spec.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int t = next.fetch_add(1); t < spec.trials;
             t = next.fetch_add(1)) {
          run_trial(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (int t = 0; t < spec.trials; ++t) {
    if (report.trial_success[t]) ++report.successes;
  }
  report.success_rate =
      static_cast<double>(report.successes) / static_cast<double>(spec.trials);
  return report;
}

ComparisonTable compare(
    const BenchmarkSpec& spec,
    const std::vector<std::pair<std::string, Controller>>& controllers,
    std::uint64_t seed) {
  require(!controllers.empty(), "at least one controller required");
  ComparisonTable table;
  table.benchmark = spec.label;
  table.seed = seed;
  for (const auto& [name, ctrl] : controllers) {
    table.reports.push_back(monte_carlo(spec, ctrl, name, seed));
  }
  table.initial_conditions = table.reports.front().initial_conditions;
  return table;
}

const char* to_string(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::CartPoleSoftWalls: return "CartPoleSoftWalls";
    case BenchmarkName::ThreeCarts: return "ThreeCarts";
    case BenchmarkName::AcrobotJointLimits: return "AcrobotJointLimits";
  }
  return "Unknown";
}

}  // namespace lcsctl
