#pragma once

// Ridge-regularized RESCAL relation matrices.
//
// For entity rows A (n x d), a 0/1 adjacency X (n x n) and lambda > 0, the
// minimizer of
//   L(M) = 1/2 ||X - A M A^T||_F^2 + lambda/2 ||M||_F^2
// satisfies the Sylvester normal equation
//   A^T A M A^T A + lambda M = A^T X A.
// With the thin SVD A = U diag(s) V^T the equation decouples entrywise:
//   M = V (P .* (U^T X U)) V^T,   P_ij = s_i s_j / (s_i^2 s_j^2 + lambda).
// solve_sylvester_kron solves the same equation through the dense
// d^2 x d^2 Kronecker system and is kept as a small-d oracle.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "relprobe/error.hpp"

namespace relprobe::solver {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Largest d accepted by the Kronecker oracle.
inline constexpr Eigen::Index kKronMaxDim = 32;

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCategory::numeric, std::string(what) + " has non-finite entries");
  }
}

template <typename DerivedA, typename DerivedX>
void require_shapes(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedX>& x) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw Error(ErrorCategory::usage, "entity matrix must be non-empty");
  }
  if (x.rows() != a.rows() || x.cols() != a.rows()) {
    throw Error(ErrorCategory::usage,
                "adjacency is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                    " but the entity matrix has " + std::to_string(a.rows()) + " rows");
  }
}

template <typename Scalar>
void require_positive(Scalar lambda) {
  if (!(lambda > Scalar(0)) || !std::isfinite(static_cast<double>(lambda))) {
    throw Error(ErrorCategory::numeric, "regularization lambda must be positive and finite");
  }
}

}  // namespace detail

/// Thin SVD of the entity matrix: A = U diag(S) V^T with rank min(n, d).
template <typename Scalar>
struct SvdFactors {
  Matrix<Scalar> U;
  Vector<Scalar> S;  // descending
  Matrix<Scalar> V;

  template <typename Derived>
  static SvdFactors compute(const Eigen::MatrixBase<Derived>& a) {
    Eigen::BDCSVD<Matrix<Scalar>> svd(a.template cast<Scalar>(),
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }

  Eigen::Index rank() const { return S.size(); }

  /// P_ij = s_i s_j / (s_i^2 s_j^2 + lambda); zero where s_i or s_j is zero.
  Matrix<Scalar> coefficients(Scalar lambda) const {
    const Vector<Scalar> sq = S.cwiseProduct(S);
    Matrix<Scalar> num = S * S.transpose();
    Matrix<Scalar> den = (sq * sq.transpose()).array() + lambda;
    return num.cwiseQuotient(den);
  }

  Matrix<Scalar> reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

/// Factorizes A once and solves for any number of adjacencies and lambdas.
/// Safe to share across threads after construction.
template <typename Scalar>
class SylvesterSolver {
 public:
  template <typename Derived>
  explicit SylvesterSolver(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() < 1 || a.cols() < 1) {
      throw Error(ErrorCategory::usage, "entity matrix must be non-empty");
    }
    detail::require_finite(a, "entity matrix");
    factors_ = SvdFactors<Scalar>::compute(a);
    rows_ = a.rows();
    dim_ = a.cols();
  }

  const SvdFactors<Scalar>& factors() const { return factors_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index dim() const { return dim_; }

  /// U^T X U; independent of lambda, so sweeps rotate each adjacency once.
  template <typename Derived>
  Matrix<Scalar> rotate(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != rows_ || x.cols() != rows_) {
      throw Error(ErrorCategory::usage, "adjacency shape does not match the entity matrix");
    }
    detail::require_finite(x, "adjacency");
    const auto& u = factors_.U;
    return u.transpose() * x.template cast<Scalar>() * u;
  }

  Matrix<Scalar> solve_rotated(const Matrix<Scalar>& rotated, Scalar lambda) const {
    detail::require_positive(lambda);
    const auto& v = factors_.V;
    return v * factors_.coefficients(lambda).cwiseProduct(rotated) * v.transpose();
  }

  template <typename Derived>
  Matrix<Scalar> solve(const Eigen::MatrixBase<Derived>& x, Scalar lambda) const {
    detail::require_positive(lambda);
    return solve_rotated(rotate(x), lambda);
  }

 private:
  SvdFactors<Scalar> factors_;
  Eigen::Index rows_ = 0;
  Eigen::Index dim_ = 0;
};

template <typename DerivedA, typename DerivedX>
Matrix<typename DerivedA::Scalar> solve_sylvester_svd(const Eigen::MatrixBase<DerivedA>& a,
                                                      const Eigen::MatrixBase<DerivedX>& x,
                                                      typename DerivedA::Scalar lambda) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_shapes(a, x);
  detail::require_positive(lambda);
  return SylvesterSolver<Scalar>(a).solve(x, lambda);
}

/// Dense Kronecker-form solve of the normal equation. Accepts lambda = 0 and
/// reports a singular system as Error(numeric).
template <typename DerivedA, typename DerivedX>
Matrix<typename DerivedA::Scalar> solve_sylvester_kron(const Eigen::MatrixBase<DerivedA>& a,
                                                       const Eigen::MatrixBase<DerivedX>& x,
                                                       typename DerivedA::Scalar lambda) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_shapes(a, x);
  detail::require_finite(a, "entity matrix");
  detail::require_finite(x, "adjacency");
  if (!(lambda >= Scalar(0))) {
    throw Error(ErrorCategory::numeric, "regularization lambda must be non-negative");
  }
  const Eigen::Index d = a.cols();
  if (d > kKronMaxDim) {
    throw Error(ErrorCategory::usage, "Kronecker solve limited to d <= " +
                                          std::to_string(kKronMaxDim) + ", got " +
                                          std::to_string(d));
  }
  const Matrix<Scalar> gram = a.transpose() * a;
  const Matrix<Scalar> rhs = a.transpose() * x.template cast<Scalar>() * a;

  // Column-major vec: vec(G M G)[i + j d] = sum_{k,l} G_ik G_lj M_kl.
  const Eigen::Index d2 = d * d;
  Matrix<Scalar> system(d2, d2);
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index k = 0; k < d; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
          system(i + j * d, k + l * d) = gram(i, k) * gram(l, j);
        }
      }
    }
  }
  system.diagonal().array() += lambda;

  Eigen::FullPivLU<Matrix<Scalar>> lu(system);
  if (!lu.isInvertible()) {
    throw Error(ErrorCategory::numeric, "Kronecker system is singular");
  }
  const Vector<Scalar> vec_rhs = Eigen::Map<const Vector<Scalar>>(rhs.data(), d2);
  const Vector<Scalar> vec_m = lu.solve(vec_rhs);
  return Eigen::Map<const Matrix<Scalar>>(vec_m.data(), d, d);
}

/// ||A^T A M A^T A + lambda M - A^T X A||_F
template <typename DerivedA, typename DerivedX, typename DerivedM>
typename DerivedA::Scalar residual(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedX>& x,
                                   typename DerivedA::Scalar lambda,
                                   const Eigen::MatrixBase<DerivedM>& m) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_shapes(a, x);
  const Matrix<Scalar> gram = a.transpose() * a;
  const Matrix<Scalar> lhs = gram * m * gram + lambda * m;
  return (lhs - a.transpose() * x.template cast<Scalar>() * a).norm();
}

/// 1/2 ||X - A M A^T||_F^2 + lambda/2 ||M||_F^2
template <typename DerivedA, typename DerivedX, typename DerivedM>
typename DerivedA::Scalar ridge_objective(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedX>& x,
                                          typename DerivedA::Scalar lambda,
                                          const Eigen::MatrixBase<DerivedM>& m) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_shapes(a, x);
  const Matrix<Scalar> fit = x.template cast<Scalar>() - a * m * a.transpose();
  return Scalar(0.5) * fit.squaredNorm() + Scalar(0.5) * lambda * m.squaredNorm();
}

}  // namespace relprobe::solver
