// vuniq/gaussian.hpp

// Copyright 2026  The vuniq Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VUNIQ_GAUSSIAN_HPP_
#define VUNIQ_GAUSSIAN_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"

namespace vuniq {

struct GaussianModel {
  Vector mean;
  Matrix covariance;

  int Dim() const { return static_cast<int>(mean.size()); }
};

// Maximum-likelihood fit (1/N covariance normalization, so that identical
// per-group and pooled samples produce identical models).
inline GaussianModel FitGaussian(const std::vector<const Vector *> &samples) {
  if (samples.empty()) throw EmptyInputError("FitGaussian: no samples");
  const int m = static_cast<int>(samples.front()->size());
  Vector mean = Vector::Zero(m);
  for (const Vector *v : samples) {
    if (v->size() != m)
      throw DimensionMismatchError("FitGaussian: mixed dimensions");
    mean += *v;
  }
  mean /= static_cast<double>(samples.size());
  Matrix cov = Matrix::Zero(m, m);
  for (const Vector *v : samples) {
    Vector d = *v - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(samples.size());
  return {std::move(mean), std::move(cov)};
}

namespace detail {

inline void CheckSymmetric(const Matrix &a, const char *what) {
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError(Strf("%s: covariance not symmetric", what));
}

inline Eigen::LLT<Matrix> CholeskyOrThrow(const Matrix &a, const char *what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    throw NumericalError(
        Strf("%s: covariance not positive definite (smallest eigenvalue %g)",
             what, es.eigenvalues().minCoeff()));
  }
  return llt;
}

inline double LogDetFromLlt(const Eigen::LLT<Matrix> &llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

// Closed-form KL divergence D(p || q) between multivariate Gaussians,
// returned in bits.
inline double KlGaussianBits(const GaussianModel &p, const GaussianModel &q) {
  if (p.Dim() != q.Dim())
    throw DimensionMismatchError("KlGaussianBits: dimension mismatch");
  detail::CheckSymmetric(p.covariance, "KlGaussianBits(p)");
  detail::CheckSymmetric(q.covariance, "KlGaussianBits(q)");
  const int m = p.Dim();
  auto llt_q = detail::CholeskyOrThrow(q.covariance, "KlGaussianBits(q)");
  auto llt_p = detail::CholeskyOrThrow(p.covariance, "KlGaussianBits(p)");
  const double trace = llt_q.solve(p.covariance).trace();
  const Vector diff = q.mean - p.mean;
  const double mahal = diff.dot(llt_q.solve(diff));
  const double log_det_ratio =
      detail::LogDetFromLlt(llt_q) - detail::LogDetFromLlt(llt_p);
  const double nats = 0.5 * (trace + mahal - m + log_det_ratio);
  return nats / M_LN2;
}

}  // namespace vuniq

#endif  // VUNIQ_GAUSSIAN_HPP_
