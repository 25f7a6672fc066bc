#pragma once

#include "bdagar/inference.hpp"
#include "bdagar/model_selection.hpp"
#include "bdagar/region_graph.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bdagar {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string format_full(double x);  // %.17g, round-trips doubles exactly
std::string format_sig6(double x);  // %.6g, presentation precision for CSVs

// One fit invocation: model family, which disease is marginal vs conditional,
// covariate selection, priors, sampler settings, optional vertex reorder.
struct RunConfig {
  std::string model = "bdagar";  // bdagar | gmcar
  std::array<std::string, 2> disease_order{};  // empty -> dataset column order
  std::optional<std::vector<std::string>> covariates_shared;
  std::map<std::string, std::vector<std::string>> covariates_by_disease;
  PriorSpec prior;
  McmcConfig mcmc;
  std::vector<std::string> vertex_order{};  // empty -> graph file order
  bool log_transform = false;
  std::string output_dir = "fit";

  PrecisionKind kind() const;
  void validate() const;
  static RunConfig from_json_text(const std::string& text);
  // Echo with every default materialized from the fitted dataset.
  std::string to_json_text(const Dataset& data) const;
};

struct SimulationTruth {
  std::array<std::string, 2> disease_names{"d1", "d2"};
  std::string model = "bdagar";
  std::array<Eigen::VectorXd, 2> beta;
  std::array<double, 2> sigma2{1.0, 1.0};
  std::array<double, 2> tau{1.0, 1.0};
  std::array<double, 2> rho{0.5, 0.5};
  LinkingParams eta;
  std::uint64_t seed = 42;

  void validate() const;
  static SimulationTruth from_json_text(const std::string& text);
  // Echo; includes the drawn w when one is supplied.
  std::string to_json_text(const Eigen::VectorXd* w = nullptr) const;
};

struct SimulationResult {
  Dataset data;
  std::string csv_text;  // the Dataset above is this text re-parsed
  Eigen::VectorXd w;     // the drawn 2k latent effects
};

// Forward simulation: standard-normal covariates, w ~ N(0, Qw^{-1}),
// y_ij = x_ij beta_i + w_ij + eps_ij. Deterministic given truth.seed.
SimulationResult simulate_dataset(const RegionGraph& graph, const SimulationTruth& truth);

Dataset parse_dataset_csv(const std::string& text, const RegionGraph& graph,
                          const RunConfig& config);
Dataset load_dataset(const std::string& csv_path, const std::string& graph_path,
                     const RunConfig& config);

struct RegionValue {
  std::string region;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

std::string values_csv_text(std::vector<RegionValue> values);  // sorted by region id
void export_values_csv(const std::vector<RegionValue>& values, const std::string& path);
std::vector<RegionValue> parse_values_csv(const std::string& text);

std::string choropleth_text(const std::string& geojson_text,
                            const std::vector<RegionValue>& values,
                            const std::string& id_property, const std::string& value_field);
void export_choropleth(const std::vector<RegionValue>& values, const std::string& geojson_path,
                       const std::string& id_property, const std::string& value_field,
                       const std::string& out_path);

struct FitResult {
  RunConfig config;
  Dataset data;
  PosteriorDraws draws;
  std::vector<SummaryRow> summary;
  WaicReport waic_report;
};

// graph is the file-order graph; config.vertex_order is applied here.
FitResult run_fit(const RegionGraph& graph, const std::string& csv_text, const RunConfig& config);

// draws.csv, summary.csv, waic.json, config_echo.json, acceptance.json,
// graph.txt
void write_fit_directory(const FitResult& fit, const std::string& dir);

std::string draws_csv_text(const PosteriorDraws& draws);
PosteriorDraws parse_draws_csv(const std::string& text);

struct LoadedFit {
  PosteriorDraws draws;
  RegionGraph graph;
  PrecisionKind kind = PrecisionKind::dagar;
  std::array<std::string, 2> disease_names;
  std::string model = "bdagar";
};

LoadedFit read_fit_directory(const std::string& dir);
WaicReport read_waic_json(const std::string& dir);

// "model [d2|d1]": the conditional disease given the marginal one.
std::string fit_label(const std::string& model, const std::array<std::string, 2>& diseases);

int cli_main(int argc, char** argv);

}  // namespace bdagar
