#include "bdagar/errors.hpp"
#include "bdagar/inference.hpp"
#include "bdagar/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace bdagar {

EssResult ess_of_series(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 10) throw ValidationError("effective sample size needs at least 10 draws per chain");
  const double mean = x.mean();
  const Eigen::VectorXd c = x.array() - mean;
  const double gamma0 = c.squaredNorm() / double(n);
  if (gamma0 <= 1e-24 * (1.0 + mean * mean)) return {0.0, true};

  auto gamma = [&](Eigen::Index t) {
    return c.head(n - t).dot(c.tail(n - t)) / double(n);
  };

  // Geyer initial positive sequence: accumulate paired autocorrelations while positive.
  double tau = -1.0;
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (gamma(2 * m) + gamma(2 * m + 1)) / gamma0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1e-8);
  return {double(n) / tau, false};
}

EssResult effective_sample_size(const PosteriorDraws& draws, const std::string& param) {
  const Eigen::VectorXd col = draws.column(param);
  double total = 0.0;
  bool all_degenerate = true;
  for (int c = 0; c < draws.n_chains; ++c) {
    std::vector<double> series;
    for (Eigen::Index r = 0; r < col.size(); ++r)
      if (draws.chain_of_row[static_cast<std::size_t>(r)] == c) series.push_back(col(r));
    const EssResult one =
        ess_of_series(Eigen::Map<const Eigen::VectorXd>(series.data(), series.size()));
    total += one.value;
    all_degenerate = all_degenerate && one.degenerate;
  }
  return {total, all_degenerate};
}

namespace {

// Round half away from zero in decimal: values a few ulps below a .xx5
// boundary (representation error of an exact decimal) still round up.
double round2(double x) {
  const double scaled = std::abs(x) * 100.0 * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
  return std::copysign(std::round(scaled) / 100.0, x);
}

std::string format_summary(double mean, double lo, double hi) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f, %.2f)", round2(mean), round2(lo), round2(hi));
  return buf;
}

}  // namespace

SummaryRow summarize_series(const std::string& name, const Eigen::VectorXd& x) {
  if (x.size() < 2) throw ValidationError("summaries need at least two draws");
  SummaryRow row;
  row.name = name;
  row.mean = x.mean();
  row.lo = quantile_type7(x, 0.025);
  row.hi = quantile_type7(x, 0.975);
  if (x.size() >= 10) {
    const EssResult e = ess_of_series(x);
    row.ess = e.value;
    row.degenerate = e.degenerate;
  } else {
    row.ess = std::numeric_limits<double>::quiet_NaN();
  }
  row.formatted = format_summary(row.mean, row.lo, row.hi);
  return row;
}

std::vector<SummaryRow> summarize(const PosteriorDraws& draws) {
  if (draws.values.rows() < 2) throw ValidationError("summaries need at least two draws");
  const Eigen::Index per_chain = draws.values.rows() / std::max(1, draws.n_chains);
  std::vector<SummaryRow> rows;
  rows.reserve(draws.names.size());
  for (std::size_t j = 0; j < draws.names.size(); ++j) {
    const Eigen::VectorXd col = draws.values.col(static_cast<Eigen::Index>(j));
    SummaryRow row;
    row.name = draws.names[j];
    row.mean = col.mean();
    row.lo = quantile_type7(col, 0.025);
    row.hi = quantile_type7(col, 0.975);
    if (per_chain >= 10) {
      const EssResult e = effective_sample_size(draws, draws.names[j]);
      row.ess = e.value;
      row.degenerate = e.degenerate;
    } else {
      row.ess = std::numeric_limits<double>::quiet_NaN();
    }
    row.formatted = format_summary(row.mean, row.lo, row.hi);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bdagar
