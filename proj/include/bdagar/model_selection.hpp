#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bdagar/inference.hpp"

namespace bdagar {

// Log pointwise predictive densities, one row per retained draw, one column
// per observation (disease 1 regions first, then disease 2).
struct PointwiseLogLik {
  Eigen::MatrixXd values;

  Eigen::Index n_draws() const { return values.rows(); }
  Eigen::Index n_points() const { return values.cols(); }
};

struct WaicReport {
  double lppd = 0.0;
  double p_waic = 0.0;
  double waic = 0.0;
  Eigen::VectorXd per_point;  // pointwise -2*(lppd_n - p_n)
};

PointwiseLogLik pointwise_log_lik(const PosteriorDraws& draws, const Dataset& data);

WaicReport waic(const PointwiseLogLik& ll);

struct ComparisonRow {
  std::string name;
  WaicReport report;
  bool best = false;
};

// Rows sorted by WAIC ascending, ties broken by name; the first row is best.
std::vector<ComparisonRow> compare(const std::vector<std::pair<std::string, WaicReport>>& reports);

std::string comparison_text(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace bdagar
