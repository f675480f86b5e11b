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

#ifndef LCSCTL_RICCATI_HPP
#define LCSCTL_RICCATI_HPP

#include "lcsctl/common.hpp"

namespace lcsctl {

/// Stabilizing solution P of the continuous-time algebraic Riccati equation
///   A'P + P A - P B R^{-1} B' P + Q = 0,
/// computed from the stable invariant subspace of the Hamiltonian matrix.
/// Throws NotStabilizableError when the Hamiltonian has eigenvalues on (or
/// numerically at) the imaginary axis, which covers unstabilizable pairs.
Matrix care_solve(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R);

/// LQR feedback in the u = K x convention of the Controller type, i.e.
/// K = -R^{-1} B' P so that A + B K is Hurwitz.
Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Qw,
                const Matrix& Rw);

}  // namespace lcsctl

#endif  // LCSCTL_RICCATI_HPP
