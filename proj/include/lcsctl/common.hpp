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

#ifndef LCSCTL_COMMON_HPP
#define LCSCTL_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lcsctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when matrix/vector dimensions are inconsistent with the model.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation requires a P-matrix and the input is not one.
class NotPMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by combinatorial routines when the problem size exceeds their guard.
class SizeGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a (lambda, x) pair fails the complementarity residual check.
class NotASolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed input files or schema violations.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an inner SDP solve fails in a way synthesis cannot recover from.
class SdpFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a Riccati solve meets an unstabilizable or borderline pair.
class NotStabilizableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a relaxation cannot represent the given model (for example
/// the homogeneous representation with a nonzero complementarity offset).
class UnsupportedRepresentationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace lcsctl

#endif  // LCSCTL_COMMON_HPP
