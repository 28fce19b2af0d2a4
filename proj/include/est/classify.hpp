#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "est/error.hpp"

namespace est {

/// Linear classifier y ≈ w·x + b fitted to ±1 labels by minimum-norm least
/// squares.
class LeastSquaresClassifier {
 public:
  /// features: one row per sample, all rows the same length.
  void fit(const std::vector<std::vector<double>>& features, std::span<const int> labels) {
    if (features.empty() || features.size() != labels.size()) {
      throw Error(ErrorCode::InvalidArgument, "feature and label counts differ");
    }
    const auto rows = static_cast<Eigen::Index>(features.size());
    const auto cols = static_cast<Eigen::Index>(features.front().size()) + 1;
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& f = features[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(f.size()) + 1 != cols) {
        throw Error(ErrorCode::DimensionMismatch, "feature rows have different lengths");
      }
      for (Eigen::Index c = 0; c + 1 < cols; ++c) x(r, c) = f[static_cast<std::size_t>(c)];
      x(r, cols - 1) = 1.0;
      y(r) = labels[static_cast<std::size_t>(r)] > 0 ? 1.0 : -1.0;
    }
    coef_ = x.completeOrthogonalDecomposition().solve(y);
  }

  int predict(std::span<const double> feature) const {
    double s = coef_(coef_.size() - 1);
    for (std::size_t c = 0; c < feature.size(); ++c) s += coef_(static_cast<Eigen::Index>(c)) * feature[c];
    return s >= 0.0 ? 1 : -1;
  }

  double accuracy(const std::vector<std::vector<double>>& features, std::span<const int> labels) const {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < features.size(); ++r) {
      if (predict(features[r]) == (labels[r] > 0 ? 1 : -1)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(features.size());
  }

 private:
  Eigen::VectorXd coef_;
};

}  // namespace est
