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

#ifndef LCSCTL_BENCHMARKS_HPP
#define LCSCTL_BENCHMARKS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lcsctl/common.hpp"
#include "lcsctl/lcs_model.hpp"
#include "lcsctl/synthesis.hpp"

namespace lcsctl {

enum class BenchmarkName { CartPoleSoftWalls, ThreeCarts, AcrobotJointLimits };

/// One benchmark system: the LCS design model, the evaluation plant (full
/// nonlinear dynamics where the source system has them, the LCS itself
/// otherwise), the trial protocol, and the baseline/synthesis defaults.
struct BenchmarkSpec {
  BenchmarkName name = BenchmarkName::CartPoleSoftWalls;
  std::string label;
  LcsModel lcs;

  /// Gap offset of the evaluation plant: lambda solves the LCP with matrix
  /// lcs.F and offset plant_gap0(x). For the LCS plant this is E x + c.
  std::function<Vector(const Vector&)> plant_gap0;
  /// Contact force of the evaluation plant at a state (inner LCP on the
  /// plant's gap function).
  std::function<Vector(const Vector&)> plant_force;
  /// Evaluation plant right-hand side (x, u) -> xdot; resolves its own
  /// contact forces via plant_force.
  std::function<Vector(const Vector&, const Vector&)> nonlinear_rhs;
  /// True when the evaluation plant is the LCS itself.
  bool lcs_plant = false;

  /// Per-coordinate uniform IC ranges [lo, hi].
  std::vector<std::pair<double, double>> ic_ranges;
  int trials = 100;
  double t_final = 10.0;
  double success_eps = 0.05;
  double step = kDefaultStep;

  /// Baseline LQR weights (empty when the benchmark has no LQR baseline).
  Matrix lqr_Qw;
  Matrix lqr_Rw;
  bool has_lqr_baseline = true;

  /// Documented synthesis defaults for this benchmark.
  SynthesisOptions synth;

  void validate() const;
};

/// Aggregate Monte Carlo outcome for one controller on one benchmark.
struct MonteCarloReport {
  std::string controller_name;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::vector<double> terminal_norms;
  std::vector<bool> trial_success;
  std::vector<bool> trial_diverged;
  std::vector<Vector> initial_conditions;
  std::uint64_t seed = 0;
};

/// Paired comparison: every controller sees the identical IC sequence.
struct ComparisonTable {
  std::string benchmark;
  std::uint64_t seed = 0;
  std::vector<Vector> initial_conditions;
  std::vector<MonteCarloReport> reports;
};

BenchmarkSpec cartpole_spec();
BenchmarkSpec three_carts_spec();
BenchmarkSpec acrobot_spec();

/// Lookup by CLI label: "cartpole", "three_carts", "acrobot".
BenchmarkSpec benchmark_by_name(const std::string& label);
std::vector<std::string> benchmark_names();

/// Baseline LQR controller (u = Kx, L = 0) with the benchmark's weights.
Controller lqr_baseline(const BenchmarkSpec& spec);

/// Deterministic IC for (seed, trial), independent of execution order.
Vector initial_condition(const BenchmarkSpec& spec, std::uint64_t seed,
                         int trial);

/// Integrates the evaluation plant under u = Kx + L*lambda.
Trajectory simulate_plant(const BenchmarkSpec& spec, const Controller& ctrl,
                          const Vector& x0, double t_final, double h);

MonteCarloReport monte_carlo(const BenchmarkSpec& spec, const Controller& ctrl,
                             const std::string& controller_name,
                             std::uint64_t seed);

ComparisonTable compare(
    const BenchmarkSpec& spec,
    const std::vector<std::pair<std::string, Controller>>& controllers,
    std::uint64_t seed);

/// Worker cap for the trial harness: LCSCTL_THREADS, else hardware threads.
int harness_threads();

const char* to_string(BenchmarkName name);

}  // namespace lcsctl

#endif  // LCSCTL_BENCHMARKS_HPP
