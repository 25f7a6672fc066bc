#include "bdagar/model_selection.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/kernels.hpp"
#include "bdagar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bdagar {

PointwiseLogLik pointwise_log_lik(const PosteriorDraws& draws, const Dataset& data) {
  return PointwiseLogLik{pointwise_log_lik_matrix(draws, data)};
}

WaicReport waic(const PointwiseLogLik& ll) {
  const Eigen::Index s = ll.n_draws();
  const Eigen::Index n = ll.n_points();
  if (s < 1 || n < 1) throw ValidationError("log-likelihood matrix is empty");
  if (!ll.values.allFinite()) throw ValidationError("log-likelihood matrix has non-finite entries");

  WaicReport report;
  report.per_point.resize(n);
  const double log_s = std::log(double(s));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd col = ll.values.col(j);
    const double lppd_j = log_sum_exp(col) - log_s;
    const double p_j = sample_variance(col);
    report.lppd += lppd_j;
    report.p_waic += p_j;
    report.per_point(j) = -2.0 * (lppd_j - p_j);
  }
  report.waic = -2.0 * (report.lppd - report.p_waic);
  return report;
}

std::vector<ComparisonRow> compare(
    const std::vector<std::pair<std::string, WaicReport>>& reports) {
  if (reports.empty()) throw ValidationError("comparison needs at least one model");
  std::vector<ComparisonRow> rows;
  rows.reserve(reports.size());
  for (const auto& [name, report] : reports) rows.push_back({name, report, false});
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.report.waic != b.report.waic) return a.report.waic < b.report.waic;
    return a.name < b.name;
  });
  rows.front().best = true;
  return rows;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows) {
  std::size_t width = std::string("model").size();
  for (const auto& row : rows) width = std::max(width, row.name.size());

  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s %12s %12s %12s\n", int(width), "model", "lppd", "p_WAIC",
                "WAIC");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s %12.2f %12.2f %12.2f%s\n", int(width), row.name.c_str(),
                  row.report.lppd, row.report.p_waic, row.report.waic, row.best ? "  *" : "");
    out << buf;
  }
  return out.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "model,lppd,p_waic,waic,best\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), ",%.2f,%.2f,%.2f,%d\n", row.report.lppd, row.report.p_waic,
                  row.report.waic, row.best ? 1 : 0);
    out << row.name << buf;
  }
  return out.str();
}

}  // namespace bdagar
