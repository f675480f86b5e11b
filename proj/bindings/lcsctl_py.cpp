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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcsctl/benchmarks.hpp"
#include "lcsctl/certificate.hpp"
#include "lcsctl/io.hpp"
#include "lcsctl/lcp.hpp"
#include "lcsctl/lcs_model.hpp"
#include "lcsctl/riccati.hpp"
#include "lcsctl/synthesis.hpp"

namespace py = pybind11;
using namespace lcsctl;

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Contact-aware controller synthesis for linear "
              "complementarity systems";

  py::class_<LcsModel>(mod, "LcsModel")
      .def(py::init<>())
      .def_readwrite("A", &LcsModel::A)
      .def_readwrite("B", &LcsModel::B)
      .def_readwrite("D", &LcsModel::D)
      .def_readwrite("E", &LcsModel::E)
      .def_readwrite("F", &LcsModel::F)
      .def_readwrite("c", &LcsModel::c)
      .def_readwrite("names", &LcsModel::names)
      .def_property_readonly("n", &LcsModel::n)
      .def_property_readonly("k", &LcsModel::k)
      .def_property_readonly("m", &LcsModel::m)
      .def("validate",
           [](const LcsModel& m, bool require_c_nonneg) {
             std::string warning;
             m.validate(require_c_nonneg, &warning);
             return warning;
           },
           py::arg("require_c_nonneg") = false)
      .def("contact_force", &LcsModel::contact_force_at, py::arg("x"));

  py::class_<Controller>(mod, "Controller")
      .def(py::init<>())
      .def_readwrite("K", &Controller::K)
      .def_readwrite("L", &Controller::L);

  py::class_<PwqCertificate>(mod, "PwqCertificate")
      .def(py::init<>())
      .def_readwrite("P", &PwqCertificate::P)
      .def_readwrite("Q", &PwqCertificate::Q)
      .def_readwrite("R", &PwqCertificate::R);

  py::class_<Trajectory>(mod, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("forces", &Trajectory::forces)
      .def_readonly("inputs", &Trajectory::inputs)
      .def_readonly("comp_residuals", &Trajectory::comp_residuals)
      .def_readonly("diverged", &Trajectory::diverged)
      .def("terminal_state", &Trajectory::terminal_state);

  py::class_<VerificationReport>(mod, "VerificationReport")
      .def_readonly("samples", &VerificationReport::samples)
      .def_readonly("violations_pos", &VerificationReport::violations_pos)
      .def_readonly("violations_dec", &VerificationReport::violations_dec)
      .def_readonly("worst_pos_margin", &VerificationReport::worst_pos_margin)
      .def_readonly("worst_dec_margin", &VerificationReport::worst_dec_margin)
      .def("clean", &VerificationReport::clean);

  py::class_<SynthesisOptions>(mod, "SynthesisOptions")
      .def(py::init<>())
      .def_readwrite("omega", &SynthesisOptions::omega)
      .def_readwrite("theta_k", &SynthesisOptions::theta_k)
      .def_readwrite("theta_l", &SynthesisOptions::theta_l)
      .def_readwrite("eps_pos", &SynthesisOptions::eps_pos)
      .def_readwrite("eps_dec", &SynthesisOptions::eps_dec)
      .def_readwrite("max_alternations", &SynthesisOptions::max_alternations)
      .def_readwrite("cert_scale_cap", &SynthesisOptions::cert_scale_cap)
      .def_readwrite("verbose", &SynthesisOptions::verbose)
      .def_property(
          "sparsity_mask",
          [](const SynthesisOptions& o) {
            return o.sparsity_mask ? py::cast(*o.sparsity_mask)
                                   : py::object(py::none());
          },
          [](SynthesisOptions& o, py::object mask) {
            if (mask.is_none()) {
              o.sparsity_mask.reset();
            } else {
              o.sparsity_mask =
                  mask.cast<Eigen::Matrix<bool, Eigen::Dynamic,
                                          Eigen::Dynamic>>();
            }
          })
      .def("use_gamma1",
           [](SynthesisOptions& o) {
             o.representation = GammaRepresentation::Gamma1;
           })
      .def("use_gamma2",
           [](SynthesisOptions& o) {
             o.representation = GammaRepresentation::Gamma2;
           })
      .def("set_lqr_init",
           [](SynthesisOptions& o, const Matrix& Qw, const Matrix& Rw) {
             o.init = LqrInit{Qw, Rw};
           })
      .def("set_zero_init", [](SynthesisOptions& o) { o.init = ZeroInit{}; })
      .def("set_given_init",
           [](SynthesisOptions& o, const Matrix& K, const Matrix& L) {
             o.init = GivenInit{K, L};
           });

  py::class_<SynthesisResult>(mod, "SynthesisResult")
      .def_property_readonly(
          "status",
          [](const SynthesisResult& r) { return std::string(to_string(r.status)); })
      .def_readonly("controller", &SynthesisResult::controller)
      .def_readonly("certificate", &SynthesisResult::certificate)
      .def_readonly("multipliers", &SynthesisResult::multipliers)
      .def_readonly("margin_pos", &SynthesisResult::margin_pos)
      .def_readonly("margin_dec", &SynthesisResult::margin_dec)
      .def_readonly("iterations", &SynthesisResult::iterations)
      .def_readonly("wall_time", &SynthesisResult::wall_time)
      .def_readonly("message", &SynthesisResult::message);

  py::class_<MonteCarloReport>(mod, "MonteCarloReport")
      .def_readonly("controller_name", &MonteCarloReport::controller_name)
      .def_readonly("trials", &MonteCarloReport::trials)
      .def_readonly("successes", &MonteCarloReport::successes)
      .def_readonly("success_rate", &MonteCarloReport::success_rate)
      .def_readonly("terminal_norms", &MonteCarloReport::terminal_norms)
      .def_readonly("trial_success", &MonteCarloReport::trial_success)
      .def_readonly("trial_diverged", &MonteCarloReport::trial_diverged)
      .def_readonly("initial_conditions", &MonteCarloReport::initial_conditions)
      .def_readonly("seed", &MonteCarloReport::seed);

  py::class_<BenchmarkSpec>(mod, "BenchmarkSpec")
      .def_readonly("label", &BenchmarkSpec::label)
      .def_readonly("lcs", &BenchmarkSpec::lcs)
      .def_readonly("synth", &BenchmarkSpec::synth)
      .def_readonly("trials", &BenchmarkSpec::trials)
      .def_readonly("t_final", &BenchmarkSpec::t_final)
      .def_readonly("step", &BenchmarkSpec::step)
      .def_readonly("ic_ranges", &BenchmarkSpec::ic_ranges)
      .def_readonly("has_lqr_baseline", &BenchmarkSpec::has_lqr_baseline)
      .def_readonly("success_eps", &BenchmarkSpec::success_eps);

  mod.def("contact_force", &contact_force, py::arg("E"), py::arg("F"),
          py::arg("c"), py::arg("x"));
  mod.def("directional_derivative", &directional_derivative, py::arg("E"),
          py::arg("F"), py::arg("c"), py::arg("x"), py::arg("d"));
  mod.def("gamma_bound", &gamma_bound, py::arg("E"), py::arg("F"));
  mod.def("care_solve", &care_solve, py::arg("A"), py::arg("B"), py::arg("Q"),
          py::arg("R"));
  mod.def("lqr_gain", &lqr_gain, py::arg("A"), py::arg("B"), py::arg("Qw"),
          py::arg("Rw"));
  mod.def("simulate", &simulate, py::arg("model"), py::arg("controller"),
          py::arg("x0"), py::arg("t_final"), py::arg("h") = kDefaultStep);
  mod.def("eval_v", &eval_v, py::arg("certificate"), py::arg("x"),
          py::arg("lam"));
  mod.def("eval_vdot", &eval_vdot, py::arg("model"), py::arg("controller"),
          py::arg("certificate"), py::arg("x"));
  mod.def("verify_sampled", &verify_sampled, py::arg("model"),
          py::arg("controller"), py::arg("certificate"), py::arg("omega"),
          py::arg("n_samples"), py::arg("seed"),
          py::arg("eps_pos") = kDefaultEpsPos,
          py::arg("eps_dec") = kDefaultEpsDec);
  mod.def(
      "synthesize",
      [](const LcsModel& model, const SynthesisOptions& opts) {
        return solve_alternating(assemble_bmi(model, opts));
      },
      py::arg("model"), py::arg("options") = SynthesisOptions{});
  mod.def("benchmark", &benchmark_by_name, py::arg("label"));
  mod.def("benchmark_names", &benchmark_names);
  mod.def("lqr_baseline", &lqr_baseline, py::arg("spec"));
  mod.def("monte_carlo", &monte_carlo, py::arg("spec"), py::arg("controller"),
          py::arg("controller_name"), py::arg("seed"));
  mod.def("read_model",
          [](const std::string& path) { return read_model(path, nullptr); },
          py::arg("path"));
  mod.def("write_model", &write_model, py::arg("path"), py::arg("model"));
  mod.def("read_controller", &read_controller, py::arg("path"));
  mod.def("write_controller", &write_controller, py::arg("path"),
          py::arg("controller"));
}
