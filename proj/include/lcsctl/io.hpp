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

#ifndef LCSCTL_IO_HPP
#define LCSCTL_IO_HPP

#include <string>
#include <vector>

#include "lcsctl/benchmarks.hpp"
#include "lcsctl/certificate.hpp"
#include "lcsctl/common.hpp"
#include "lcsctl/lcs_model.hpp"
#include "lcsctl/synthesis.hpp"

namespace lcsctl {

/// Fixed float formatting used by every artifact: 17 significant digits,
/// enough to round-trip any double exactly.
std::string format_double(double v);

/// Model file: JSON with n, k, m, A, B, D, E, F, c (row-major arrays) and
/// optional names. Writers emit canonical form: alphabetical keys, fixed
/// float formatting, so write-read-write is byte-identical.
LcsModel read_model(const std::string& path, std::string* warning = nullptr);
void write_model(const std::string& path, const LcsModel& model);

/// Controller file: JSON with K, L, mask (absent when dense) and an
/// optional certificate section written after synthesis.
Controller read_controller(const std::string& path);
void write_controller(const std::string& path, const Controller& ctrl);

/// Loads the certificate section of a controller file if present.
bool read_certificate(const std::string& path, PwqCertificate* cert);
void write_synthesis_result(const std::string& path,
                            const SynthesisResult& result,
                            const SynthesisOptions& opts);

void write_verification_report(const std::string& path,
                               const VerificationReport& report, int samples,
                               double omega, std::uint64_t seed);

/// Trajectory CSV: header t, x1..xn, lam1..lamm, u1..uk, comp_residual.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Benchmark artifacts: report.json (reports plus config echo) and
/// comparison.csv (trial, ic, controller, terminal_norm, success).
void write_bench_report(const std::string& path, const BenchmarkSpec& spec,
                        const ComparisonTable& table,
                        const std::vector<std::string>& notes);
void write_comparison_csv(const std::string& path,
                          const ComparisonTable& table);

/// Config echo for commands whose primary artifact is not JSON.
void write_config_echo(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>&
                           entries);

}  // namespace lcsctl

#endif  // LCSCTL_IO_HPP
