# Copyright 2026 The lcsctl authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Contact-aware controller synthesis for linear complementarity systems."""

from lcsctl._core import (
    BenchmarkSpec,
    Controller,
    LcsModel,
    MonteCarloReport,
    PwqCertificate,
    SynthesisOptions,
    SynthesisResult,
    Trajectory,
    VerificationReport,
    benchmark,
    benchmark_names,
    care_solve,
    contact_force,
    directional_derivative,
    eval_v,
    eval_vdot,
    gamma_bound,
    lqr_baseline,
    lqr_gain,
    monte_carlo,
    read_controller,
    read_model,
    simulate,
    synthesize,
    verify_sampled,
    write_controller,
    write_model,
)

__all__ = [
    "BenchmarkSpec",
    "Controller",
    "LcsModel",
    "MonteCarloReport",
    "PwqCertificate",
    "SynthesisOptions",
    "SynthesisResult",
    "Trajectory",
    "VerificationReport",
    "benchmark",
    "benchmark_names",
    "care_solve",
    "contact_force",
    "directional_derivative",
    "eval_v",
    "eval_vdot",
    "gamma_bound",
    "lqr_baseline",
    "lqr_gain",
    "monte_carlo",
    "read_controller",
    "read_model",
    "simulate",
    "synthesize",
    "verify_sampled",
    "write_controller",
    "write_model",
]

__version__ = "0.1.0"
