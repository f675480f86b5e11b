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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcsctl/benchmarks.hpp"
#include "lcsctl/certificate.hpp"
#include "lcsctl/io.hpp"
#include "lcsctl/lcs_model.hpp"
#include "lcsctl/riccati.hpp"
#include "lcsctl/synthesis.hpp"

namespace {

using namespace lcsctl;

// Exit-code contract: 0 ok, 1 I/O or validation, 2 synthesis failure,
// 3 verification violations, 4 simulation divergence.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSynthesis = 2;
constexpr int kExitViolations = 3;
constexpr int kExitDivergence = 4;

template <typename F>
int run_guarded(F&& body) {
  try {
    return body();
  } catch (const SdpFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSynthesis;
  } catch (const NotStabilizableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSynthesis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

struct InitFlag {
  std::string spec = "lqr";

  InitStrategy build(int n, int k) const {
    if (spec == "zero") return ZeroInit{};
    if (spec == "lqr") return LqrInit{};
    if (spec.rfind("lqr:", 0) == 0) {
      const std::string rest = spec.substr(4);
      const auto comma = rest.find(',');
      if (comma == std::string::npos) {
        throw IoError("--init lqr:<q>,<r> expects two scalars");
      }
      const double q = std::stod(rest.substr(0, comma));
      const double r = std::stod(rest.substr(comma + 1));
      return LqrInit{q * Matrix::Identity(n, n), r * Matrix::Identity(k, k)};
    }
    throw IoError("unknown --init '" + spec + "' (lqr, lqr:<q>,<r>, zero)");
  }
};

void apply_mask_cols(SynthesisOptions& opts, const std::vector<int>& cols,
                     int k, int n) {
  if (cols.empty()) return;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(k, n);
  mask.setConstant(false);
  for (int c : cols) {
    if (c < 0 || c >= n) throw IoError("--mask-cols index out of range");
    for (int i = 0; i < k; ++i) mask(i, c) = true;
  }
  opts.sparsity_mask = mask;
}

void print_model_warning(const std::string& warning) {
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lcsctl: stabilizing contact-aware controllers u = Kx + L*lambda "
      "for linear complementarity systems"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Synthesize a certified controller for a model file");
  std::string synth_model, synth_out = "controller.json";
  std::string synth_repr = "gamma2";
  SynthesisOptions synth_opts;
  InitFlag synth_init;
  std::vector<int> synth_mask_cols;
  synth->add_option("model", synth_model, "model JSON file")->required();
  synth->add_option("--out", synth_out, "output controller JSON");
  synth->add_option("--repr", synth_repr, "relaxation: gamma1 or gamma2")
      ->check(CLI::IsMember({"gamma1", "gamma2"}));
  synth->add_option("--omega", synth_opts.omega, "domain radius");
  synth->add_option("--theta-k", synth_opts.theta_k, "cap on ||K||_2");
  synth->add_option("--theta-l", synth_opts.theta_l, "cap on ||L||_2");
  synth->add_option("--eps-pos", synth_opts.eps_pos, "positivity margin");
  synth->add_option("--eps-dec", synth_opts.eps_dec, "decrease margin");
  synth->add_option("--max-alt", synth_opts.max_alternations,
                    "alternation limit");
  synth->add_option("--cert-cap", synth_opts.cert_scale_cap,
                    "certificate scale cap");
  synth->add_option("--init", synth_init.spec,
                    "gain initialization: lqr, lqr:<q>,<r>, zero");
  synth->add_option("--mask-cols", synth_mask_cols,
                    "state columns of K forced to zero (0-based)");
  synth->add_flag("--verbose", synth_opts.verbose, "trace alternations");

  // verify -----------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "Sample-check a controller's certificate on a model");
  std::string verify_model, verify_ctrl, verify_out = "verification.json";
  int verify_samples = 10000;
  double verify_omega = 1.0;
  std::uint64_t verify_seed = 0;
  double verify_eps_pos = kDefaultEpsPos;
  double verify_eps_dec = kDefaultEpsDec;
  verify->add_option("model", verify_model, "model JSON file")->required();
  verify->add_option("controller", verify_ctrl,
                     "controller JSON file with certificate")
      ->required();
  verify->add_option("--samples", verify_samples, "number of sampled states");
  verify->add_option("--omega", verify_omega, "sampling ball radius");
  verify->add_option("--seed", verify_seed, "sampling seed");
  verify->add_option("--eps-pos", verify_eps_pos, "positivity margin");
  verify->add_option("--eps-dec", verify_eps_dec, "decrease margin");
  verify->add_option("--out", verify_out, "output report JSON");

  // sim ----------------------------------------------------------------
  auto* sim = app.add_subcommand("sim", "Simulate the closed loop");
  std::string sim_model, sim_ctrl, sim_out = "trajectory.csv";
  std::vector<double> sim_x0;
  double sim_t = 10.0, sim_h = kDefaultStep;
  sim->add_option("model", sim_model, "model JSON file")->required();
  sim->add_option("controller", sim_ctrl, "controller JSON file")->required();
  sim->add_option("--x0", sim_x0, "initial state (n values)")
      ->required()
      ->expected(-1);
  sim->add_option("--t", sim_t, "horizon in seconds");
  sim->add_option("--h", sim_h, "integration step");
  sim->add_option("--out", sim_out, "output trajectory CSV");

  // bench --------------------------------------------------------------
  auto* bench = app.add_subcommand(
      "bench", "Run a benchmark: synthesize, compare against LQR, report");
  std::string bench_name, bench_dir = ".", bench_ctrl_file, bench_baseline;
  int bench_trials = 0;
  std::uint64_t bench_seed = 42;
  double bench_tfinal = 0.0, bench_eps = 0.0;
  bool bench_no_baseline = false, bench_verbose = false;
  bench->add_option("name", bench_name,
                    "benchmark: cartpole, three_carts, acrobot")
      ->required();
  bench->add_option("--trials", bench_trials, "trial count override");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--t-final", bench_tfinal, "horizon override");
  bench->add_option("--success-eps", bench_eps, "success threshold override");
  bench->add_option("--out-dir", bench_dir, "output directory");
  bench->add_option("--controller", bench_ctrl_file,
                    "load this controller instead of synthesizing");
  bench->add_option("--baseline", bench_baseline,
                    "baseline spec lqr:<q>,<r> (default: paper weights)");
  bench->add_flag("--no-baseline", bench_no_baseline, "skip the LQR baseline");
  bench->add_flag("--verbose", bench_verbose, "trace synthesis");

  // lqr ----------------------------------------------------------------
  auto* lqr = app.add_subcommand("lqr", "Emit baseline LQR gains u = Kx");
  std::string lqr_model, lqr_out = "lqr.json";
  double lqr_q = 1.0, lqr_r = 1.0;
  lqr->add_option("model", lqr_model, "model JSON file")->required();
  lqr->add_option("--q", lqr_q, "state weight Qw = q*I");
  lqr->add_option("--r", lqr_r, "input weight Rw = r*I");
  lqr->add_option("--out", lqr_out, "output controller JSON");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return run_guarded([&]() {
      std::string warning;
      const LcsModel model = read_model(synth_model, &warning);
      print_model_warning(warning);
      synth_opts.representation = synth_repr == "gamma1"
                                      ? GammaRepresentation::Gamma1
                                      : GammaRepresentation::Gamma2;
      synth_opts.init = synth_init.build(model.n(), model.k());
      apply_mask_cols(synth_opts, synth_mask_cols, model.k(), model.n());
      const BmiProgram bmi = assemble_bmi(model, synth_opts);
      const SynthesisResult res = solve_alternating(bmi);
      write_synthesis_result(synth_out, res, synth_opts);
      std::cout << "status: " << to_string(res.status) << " after "
                << res.iterations << " alternation(s), decrease margin "
                << res.margin_dec << ", wall time " << res.wall_time << " s\n"
                << "controller written to " << synth_out << "\n";
      if (res.status != SynthesisStatus::Feasible && !res.message.empty()) {
        std::cerr << "synthesis: " << res.message << "\n";
      }
      return res.status == SynthesisStatus::Feasible ? kExitOk
                                                     : kExitSynthesis;
    });
  }

  if (verify->parsed()) {
    return run_guarded([&]() {
      std::string warning;
      const LcsModel model = read_model(verify_model, &warning);
      print_model_warning(warning);
      const Controller ctrl = read_controller(verify_ctrl);
      PwqCertificate cert;
      if (!read_certificate(verify_ctrl, &cert)) {
        std::cerr << "error: " << verify_ctrl
                  << " has no certificate section to verify\n";
        return kExitIo;
      }
      const VerificationReport report =
          verify_sampled(model, ctrl, cert, verify_omega, verify_samples,
                         verify_seed, verify_eps_pos, verify_eps_dec);
      write_verification_report(verify_out, report, verify_samples,
                                verify_omega, verify_seed);
      std::cout << "samples: " << report.samples
                << ", positivity violations: " << report.violations_pos
                << ", decrease violations: " << report.violations_dec << "\n"
                << "report written to " << verify_out << "\n";
      return report.clean() ? kExitOk : kExitViolations;
    });
  }

  if (sim->parsed()) {
    return run_guarded([&]() {
      std::string warning;
      const LcsModel model = read_model(sim_model, &warning);
      print_model_warning(warning);
      const Controller ctrl = read_controller(sim_ctrl);
      if (static_cast<int>(sim_x0.size()) != model.n()) {
        throw IoError("--x0 must provide exactly n = " +
                      std::to_string(model.n()) + " values");
      }
      Vector x0(model.n());
      for (int i = 0; i < model.n(); ++i) x0(i) = sim_x0[i];
      const Trajectory traj = simulate(model, ctrl, x0, sim_t, sim_h);
      write_trajectory_csv(sim_out, traj);
      write_config_echo(sim_out + ".config.json",
                        {{"command", "sim"},
                         {"controller", sim_ctrl},
                         {"h", format_double(sim_h)},
                         {"model", sim_model},
                         {"t", format_double(sim_t)}});
      if (traj.diverged) {
        std::cerr << "divergence guard tripped; partial trajectory written to "
                  << sim_out << "\n";
        return kExitDivergence;
      }
      std::cout << "trajectory written to " << sim_out << " (terminal |x| = "
                << traj.terminal_state().norm() << ")\n";
      return kExitOk;
    });
  }

  if (bench->parsed()) {
    return run_guarded([&]() {
      BenchmarkSpec spec = benchmark_by_name(bench_name);
      if (bench_trials > 0) spec.trials = bench_trials;
      if (bench_tfinal > 0.0) spec.t_final = bench_tfinal;
      if (bench_eps > 0.0) spec.success_eps = bench_eps;
      spec.synth.verbose = bench_verbose;

      std::filesystem::create_directories(bench_dir);
      const std::string ctrl_path = bench_dir + "/controller.json";

      Controller aware;
      if (!bench_ctrl_file.empty()) {
        aware = read_controller(bench_ctrl_file);
      } else {
        const BmiProgram bmi = assemble_bmi(spec.lcs, spec.synth);
        const SynthesisResult res = solve_alternating(bmi);
        write_synthesis_result(ctrl_path, res, spec.synth);
        if (res.status != SynthesisStatus::Feasible) {
          std::cerr << "synthesis " << to_string(res.status)
                    << (res.message.empty() ? "" : ": " + res.message) << "\n";
          return kExitSynthesis;
        }
        std::cout << "synthesis Feasible in " << res.iterations
                  << " alternation(s), margin " << res.margin_dec << "\n";
        aware = res.controller;
      }

      std::vector<std::pair<std::string, Controller>> controllers;
      controllers.push_back({"contact_aware", aware});
      if (!bench_no_baseline &&
          (spec.has_lqr_baseline || !bench_baseline.empty())) {
        Controller base;
        if (!bench_baseline.empty()) {
          InitFlag flag;
          flag.spec = bench_baseline;
          const auto strat = flag.build(spec.lcs.n(), spec.lcs.k());
          if (!std::holds_alternative<LqrInit>(strat)) {
            throw IoError("--baseline expects lqr:<q>,<r>");
          }
          const auto& w = std::get<LqrInit>(strat);
          base.K = lqr_gain(spec.lcs.A, spec.lcs.B,
                            w.Qw.size() > 0
                                ? w.Qw
                                : Matrix(Matrix::Identity(spec.lcs.n(),
                                                          spec.lcs.n())),
                            w.Rw.size() > 0
                                ? w.Rw
                                : Matrix(Matrix::Identity(spec.lcs.k(),
                                                          spec.lcs.k())));
          base.L = Matrix::Zero(spec.lcs.k(), spec.lcs.m());
        } else {
          base = lqr_baseline(spec);
        }
        controllers.push_back({"lqr", base});
      }

      const ComparisonTable table = compare(spec, controllers, bench_seed);

      std::vector<std::string> notes;
      if (spec.name == BenchmarkName::CartPoleSoftWalls) {
        notes.push_back(
            "x1(0) ~ U[-0.1, 0.1]: the 10*x1(0) ~ U[-1, 1] protocol");
      }
      if (spec.name == BenchmarkName::ThreeCarts) {
        notes.push_back("sparsity mask active: no feedback from x2 or x2 rate");
        notes.push_back("evaluation plant is the LCS itself");
        notes.push_back("IC ranges are a documented choice of this artifact");
      }
      write_bench_report(bench_dir + "/report.json", spec, table, notes);
      write_comparison_csv(bench_dir + "/comparison.csv", table);

      for (const auto& r : table.reports) {
        std::cout << r.controller_name << ": " << r.successes << "/"
                  << r.trials << " (" << 100.0 * r.success_rate << "%)\n";
      }
      std::cout << "artifacts in " << bench_dir << "\n";
      return kExitOk;
    });
  }

  if (lqr->parsed()) {
    return run_guarded([&]() {
      std::string warning;
      const LcsModel model = read_model(lqr_model, &warning);
      print_model_warning(warning);
      Controller ctrl;
      ctrl.K = lqr_gain(model.A, model.B,
                        lqr_q * Matrix::Identity(model.n(), model.n()),
                        lqr_r * Matrix::Identity(model.k(), model.k()));
      ctrl.L = Matrix::Zero(model.k(), model.m());
      write_controller(lqr_out, ctrl);
      std::cout << "gains written to " << lqr_out << "\n";
      return kExitOk;
    });
  }

  return kExitIo;
}
