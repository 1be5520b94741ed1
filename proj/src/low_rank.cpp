#include "lrd/low_rank.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "lrd/errors.hpp"

namespace lrd {

SvdFactors svd(const Eigen::MatrixXd& matrix) {
  if (!matrix.allFinite()) throw InvalidArgument("svd: matrix has non-finite entries");
  if (matrix.size() == 0) throw InvalidArgument("svd: empty matrix");

  Eigen::BDCSVD<Eigen::MatrixXd> solver(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("svd did not converge on a " + std::to_string(matrix.rows()) + "x" +
                             std::to_string(matrix.cols()) + " matrix");
  }
  SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};

  for (Eigen::Index j = 0; j < f.u.cols(); ++j) {
    auto col = f.u.col(j);
    const double tol = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > tol) {
        if (col(i) < 0.0) {
          col = -col;
          f.v.col(j) = -f.v.col(j);
        }
        break;
      }
    }
  }
  return f;
}

Eigen::VectorXd nnm_shrink(const Eigen::VectorXd& sigma, double theta) {
  if (!(theta >= 0.0)) throw InvalidArgument("nnm_shrink: theta must be non-negative");
  return (sigma.array() - theta).cwiseMax(0.0).matrix();
}

Eigen::VectorXd adjust_singulars(const Eigen::VectorXd& sigma, int patch_count,
                                 double noise_sigma) {
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("adjust_singulars: noise sigma must be >= 0");
  const double floor = static_cast<double>(patch_count) * noise_sigma * noise_sigma;
  return (sigma.array().square() - floor).cwiseMax(0.0).sqrt().matrix();
}

Eigen::VectorXd wnnm_weights(const Eigen::VectorXd& adjusted, double c, int patch_count,
                             double eps) {
  if (!(c > 0.0) || !(eps > 0.0)) throw InvalidArgument("wnnm_weights: c and eps must be positive");
  const double scale = c * std::sqrt(static_cast<double>(patch_count));
  return (scale / (adjusted.array() + eps)).matrix();
}

Eigen::VectorXd wnnm_shrink(const Eigen::VectorXd& sigma, const Eigen::VectorXd& thresholds) {
  if (sigma.size() != thresholds.size()) {
    throw LengthMismatch("wnnm_shrink: " + std::to_string(sigma.size()) + " values but " +
                         std::to_string(thresholds.size()) + " thresholds");
  }
  return (sigma - thresholds).cwiseMax(0.0);
}

SpectrumSplit split_spectrum(const Eigen::VectorXd& shrunk, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("split_spectrum: tau must be non-negative");
  SpectrumSplit out{Eigen::VectorXd::Zero(shrunk.size()), Eigen::VectorXd::Zero(shrunk.size())};
  for (Eigen::Index i = 0; i < shrunk.size(); ++i) {
    if (shrunk(i) > tau) {
      out.high(i) = shrunk(i);
    } else {
      out.low(i) = shrunk(i);
    }
  }
  return out;
}

Eigen::MatrixXd recompose(const SvdFactors& factors, const Eigen::VectorXd& values) {
  if (values.size() != factors.sigma.size()) {
    throw LengthMismatch("recompose: " + std::to_string(values.size()) + " values for rank " +
                         std::to_string(factors.sigma.size()));
  }
  return factors.u * values.asDiagonal() * factors.v.transpose();
}

}  // namespace lrd
