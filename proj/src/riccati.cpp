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

#include "lcsctl/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace lcsctl {

Matrix care_solve(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R) {
  const Eigen::Index n = A.rows();
  require(A.cols() == n, "A must be square");
  require(B.rows() == n, "B row count must match A");
  require(Q.rows() == n && Q.cols() == n, "Q must be n x n");
  require(R.rows() == B.cols() && R.cols() == B.cols(), "R must be k x k");

  const Matrix Rinv = R.llt().solve(Matrix::Identity(R.rows(), R.cols()));
  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -B * Rinv * B.transpose();
  H.bottomLeftCorner(n, n) = -Q;
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::EigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) {
    throw NotStabilizableError("Hamiltonian eigendecomposition failed");
  }

  // Basis of the stable invariant subspace: eigenvectors with Re(mu) < 0.
  const double axis_tol = 1e-9 * (1.0 + H.norm());
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (std::abs(re) <= axis_tol) {
      throw NotStabilizableError(
          "Hamiltonian has an eigenvalue on the imaginary axis");
    }
    if (re < 0.0) {
      if (count == n) {
        throw NotStabilizableError("stable subspace dimension exceeds n");
      }
      basis.col(count++) = es.eigenvectors().col(i);
    }
  }
  if (count != n) {
    throw NotStabilizableError("stable subspace dimension below n");
  }

  const Eigen::MatrixXcd X1 = basis.topRows(n);
  const Eigen::MatrixXcd X2 = basis.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1);
  if (!lu.isInvertible()) {
    throw NotStabilizableError("stable subspace is not a graph over the state");
  }
  Matrix P = (X2 * lu.inverse()).real();
  P = 0.5 * (P + P.transpose());
  return P;
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Qw,
                const Matrix& Rw) {
  const Matrix P = care_solve(A, B, Qw, Rw);
  const Matrix Rinv = Rw.llt().solve(Matrix::Identity(Rw.rows(), Rw.cols()));
  return -Rinv * B.transpose() * P;
}

}  // namespace lcsctl
