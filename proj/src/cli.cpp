#include "bdagar/io.hpp"

#include "bdagar/dagar.hpp"
#include "bdagar/errors.hpp"
#include "bdagar/kernels.hpp"
#include "bdagar/stats.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace bdagar {

namespace {

int run_simulate(const std::string& graph_path, const std::string& truth_path,
                 const std::string& out_path) {
  const RegionGraph graph = RegionGraph::load(graph_path);
  const SimulationTruth truth = SimulationTruth::from_json_text(read_text_file(truth_path));
  const SimulationResult sim = simulate_dataset(graph, truth);
  write_text_file(out_path, sim.csv_text);
  const std::string truth_echo =
      std::filesystem::path(out_path).replace_extension(".truth.json").string();
  write_text_file(truth_echo, truth.to_json_text(&sim.w));
  std::cout << "wrote " << out_path << " (" << graph.size() << " regions) and " << truth_echo
            << "\n";
  return 0;
}

int run_fit_cmd(const std::string& data_path, const std::string& graph_path,
                const std::string& config_path, const std::string& out_override) {
  RunConfig config = RunConfig::from_json_text(read_text_file(config_path));
  if (!out_override.empty()) config.output_dir = out_override;
  const RegionGraph graph = RegionGraph::load(graph_path);
  const FitResult fit = run_fit(graph, read_text_file(data_path), config);
  write_fit_directory(fit, config.output_dir);

  std::cout << fit_label(config.model, fit.data.disease_names) << ": " << fit.draws.rows()
            << " retained draws over " << fit.draws.n_chains << " chain(s)\n";
  for (const auto& row : fit.summary) {
    if (row.name.rfind("w1_", 0) == 0 || row.name.rfind("w2_", 0) == 0) continue;
    std::cout << "  " << row.name << " = " << row.formatted << "\n";
  }
  std::cout << "WAIC " << format_sig6(fit.waic_report.waic) << " (lppd "
            << format_sig6(fit.waic_report.lppd) << ", p_waic "
            << format_sig6(fit.waic_report.p_waic) << ")\n";
  std::cout << "outputs in " << config.output_dir << "\n";
  return 0;
}

int run_waic(const std::vector<std::string>& fit_dirs, const std::string& csv_out) {
  std::vector<std::pair<std::string, WaicReport>> reports;
  for (const auto& dir : fit_dirs) {
    const LoadedFit fit = read_fit_directory(dir);
    reports.emplace_back(fit_label(fit.model, fit.disease_names), read_waic_json(dir));
  }
  const auto rows = compare(reports);
  std::cout << comparison_text(rows);
  if (!csv_out.empty()) {
    write_text_file(csv_out, comparison_csv(rows));
    std::cout << "wrote " << csv_out << "\n";
  }
  return 0;
}

int run_corr_map(const std::string& fit_dir, const std::string& out_path) {
  const LoadedFit fit = read_fit_directory(fit_dir);
  const Eigen::MatrixXd corr = correlation_draw_matrix(fit.draws, fit.graph, fit.kind);
  std::vector<RegionValue> values;
  for (int j = 0; j < fit.graph.size(); ++j) {
    const Eigen::VectorXd col = corr.col(j);
    values.push_back({fit.graph.ids()[static_cast<std::size_t>(j)], col.mean(),
                      quantile_type7(col, 0.025), quantile_type7(col, 0.975)});
  }
  export_values_csv(values, out_path);
  std::cout << "wrote " << out_path << " (" << fit.graph.size() << " regions, "
            << corr.rows() << " draws)\n";
  return 0;
}

int run_export_map(const std::string& values_path, const std::string& geojson_path,
                   const std::string& id_property, const std::string& value_field,
                   const std::string& out_path) {
  const auto values = parse_values_csv(read_text_file(values_path));
  export_choropleth(values, geojson_path, id_property, value_field, out_path);
  std::cout << "wrote " << out_path << " (" << values.size() << " regions joined on '"
            << id_property << "')\n";
  return 0;
}

int run_check(const std::string& graph_path, double rho, const std::string& kind_name) {
  const RegionGraph graph = RegionGraph::load(graph_path);
  const PrecisionKind kind = precision_kind_from_string(kind_name);
  const SpatialPrecision prec =
      kind == PrecisionKind::dagar ? dagar_precision(graph, rho) : car_precision(graph, rho);

  std::cout << "graph: " << graph.size() << " regions, " << graph.edges().size() << " edges\n";
  std::cout << "kind: " << to_string(kind) << ", rho: " << format_sig6(rho) << "\n";

  bool pd = true;
  try {
    const SparseCholesky chol(prec.q);
    (void)chol;
  } catch (const std::exception&) {
    pd = false;
  }
  std::cout << "positive definite: " << (pd ? "yes" : "no") << "\n";
  std::cout << "log-determinant: " << format_sig6(prec.logdet) << "\n";

  if (rho == 0.0 && kind == PrecisionKind::dagar) {
    const Eigen::MatrixXd dense(prec.q);
    const double diag_err = (dense.diagonal().array() - 1.0).abs().maxCoeff();
    Eigen::MatrixXd off = dense;
    off.diagonal().setZero();
    const double off_err = off.array().abs().maxCoeff();
    std::cout << "Q = I at rho = 0 (max |diag - 1| = " << format_sig6(diag_err)
              << ", max |offdiag| = " << format_sig6(off_err) << ")\n";
  }
  return pd ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Bivariate DAGAR disease-mapping toolkit"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic dataset from a truth file");
  std::string sim_graph, sim_truth, sim_out;
  simulate->add_option("--graph", sim_graph, "region graph file")->required();
  simulate->add_option("--truth", sim_truth, "truth JSON")->required();
  simulate->add_option("--out", sim_out, "output dataset CSV")->required();

  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler and write a fit directory");
  std::string fit_data, fit_graph, fit_config, fit_out;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--graph", fit_graph, "region graph file")->required();
  fit->add_option("--config", fit_config, "run config JSON")->required();
  fit->add_option("--out", fit_out, "output directory (overrides config output_dir)");

  auto* waic_cmd = app.add_subcommand("waic", "Compare fitted models by WAIC");
  std::vector<std::string> waic_dirs;
  std::string waic_csv;
  waic_cmd->add_option("dirs", waic_dirs, "fit directories")->required()->expected(-1);
  waic_cmd->add_option("--csv", waic_csv, "also write the table as CSV");

  auto* corr = app.add_subcommand("corr-map", "Per-region cross-disease correlation summaries");
  std::string corr_fit, corr_out;
  corr->add_option("--fit", corr_fit, "fit directory")->required();
  corr->add_option("--out", corr_out, "output CSV")->required();

  auto* exp_map = app.add_subcommand("export-map", "Join per-region values onto GeoJSON");
  std::string map_values, map_geojson, map_id = "region", map_field = "value", map_out;
  exp_map->add_option("--values", map_values, "values CSV (region,mean,lo,hi)")->required();
  exp_map->add_option("--geojson", map_geojson, "input GeoJSON FeatureCollection")->required();
  exp_map->add_option("--id-property", map_id, "feature property holding the region id");
  exp_map->add_option("--field", map_field, "property name for the joined value");
  exp_map->add_option("--out", map_out, "output GeoJSON")->required();

  auto* check = app.add_subcommand("check", "Precision-matrix diagnostics for a graph");
  std::string check_graph, check_kind = "dagar";
  double check_rho = 0.0;
  check->add_option("--graph", check_graph, "region graph file")->required();
  check->add_option("--rho", check_rho, "spatial autocorrelation in [0, 1)")->required();
  check->add_option("--kind", check_kind, "precision family: dagar or car");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(simulate)) return run_simulate(sim_graph, sim_truth, sim_out);
    if (app.got_subcommand(fit)) return run_fit_cmd(fit_data, fit_graph, fit_config, fit_out);
    if (app.got_subcommand(waic_cmd)) return run_waic(waic_dirs, waic_csv);
    if (app.got_subcommand(corr)) return run_corr_map(corr_fit, corr_out);
    if (app.got_subcommand(exp_map))
      return run_export_map(map_values, map_geojson, map_id, map_field, map_out);
    if (app.got_subcommand(check)) return run_check(check_graph, check_rho, check_kind);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace bdagar
