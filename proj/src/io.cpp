#include "bdagar/io.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/sparse_chol.hpp"

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bdagar {

using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_sig6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (const char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw ValidationError("line " + std::to_string(line_no) + ": unterminated quoted field");
  out.push_back(cur);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw ValidationError(where + ": missing value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno != 0 || !std::isfinite(v))
    throw ValidationError(where + ": invalid number '" + s + "'");
  return v;
}

long parse_long(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw ValidationError(where + ": missing value");
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno != 0)
    throw ValidationError(where + ": invalid integer '" + s + "'");
  return v;
}

ordered_json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

void require_keys(const ordered_json& j, const std::vector<std::string>& allowed,
                  const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& key : allowed) known = known || key == item.key();
    if (!known) throw ValidationError("unknown " + what + " key '" + item.key() + "'");
  }
}

double json_number(const ordered_json& j, const std::string& key, double fallback,
                   const std::string& what) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ValidationError(what + " key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<std::string> json_string_array(const ordered_json& v, const std::string& what) {
  if (!v.is_array()) throw ValidationError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ValidationError(what + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Eigen::VectorXd json_vector(const ordered_json& j, const std::string& key,
                            const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + " is missing key '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw ValidationError(what + " key '" + key + "' must be a non-empty number array");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ValidationError(what + " key '" + key + "' must contain only numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

PrecisionKind model_kind(const std::string& model) {
  if (model == "bdagar") return PrecisionKind::dagar;
  if (model == "gmcar") return PrecisionKind::car;
  throw ValidationError("model must be 'bdagar' or 'gmcar', got '" + model + "'");
}

}  // namespace

PrecisionKind RunConfig::kind() const { return model_kind(model); }

void RunConfig::validate() const {
  model_kind(model);
  if (disease_order[0].empty() != disease_order[1].empty())
    throw ValidationError("disease_order must list both diseases");
  if (!disease_order[0].empty() && disease_order[0] == disease_order[1])
    throw ValidationError("disease_order entries must be distinct");
  prior.validate();
  mcmc.validate();
  if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  const ordered_json j = parse_json_text(text, "config");
  require_keys(j,
               {"model", "disease_order", "covariates", "priors", "mcmc", "vertex_order",
                "log_transform", "output_dir"},
               "config");

  RunConfig config;
  if (j.contains("model")) {
    if (!j.at("model").is_string()) throw ValidationError("config key 'model' must be a string");
    config.model = j.at("model").get<std::string>();
  }
  model_kind(config.model);

  if (j.contains("disease_order")) {
    const auto order = json_string_array(j.at("disease_order"), "config key 'disease_order'");
    if (order.size() != 2)
      throw ValidationError("config key 'disease_order' must list exactly two diseases");
    config.disease_order = {order[0], order[1]};
  }

  if (j.contains("covariates")) {
    const auto& cov = j.at("covariates");
    if (cov.is_array()) {
      config.covariates_shared = json_string_array(cov, "config key 'covariates'");
    } else if (cov.is_object()) {
      for (const auto& item : cov.items())
        config.covariates_by_disease[item.key()] =
            json_string_array(item.value(), "config covariates for '" + item.key() + "'");
    } else {
      throw ValidationError("config key 'covariates' must be an array or an object per disease");
    }
  }

  if (j.contains("priors")) {
    const auto& p = j.at("priors");
    require_keys(p, {"a_tau", "b_tau", "a_sigma", "b_sigma", "beta_var", "eta_var"},
                 "config priors");
    config.prior.a_tau = json_number(p, "a_tau", config.prior.a_tau, "priors");
    config.prior.b_tau = json_number(p, "b_tau", config.prior.b_tau, "priors");
    config.prior.a_sigma = json_number(p, "a_sigma", config.prior.a_sigma, "priors");
    config.prior.b_sigma = json_number(p, "b_sigma", config.prior.b_sigma, "priors");
    config.prior.beta_var = json_number(p, "beta_var", config.prior.beta_var, "priors");
    config.prior.eta_var = json_number(p, "eta_var", config.prior.eta_var, "priors");
  }

  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    require_keys(m, {"iterations", "burn_in", "thin", "chains", "seed", "adapt", "init_step"},
                 "config mcmc");
    config.mcmc.iterations =
        static_cast<int>(json_number(m, "iterations", config.mcmc.iterations, "mcmc"));
    config.mcmc.burn_in = static_cast<int>(json_number(m, "burn_in", config.mcmc.burn_in, "mcmc"));
    config.mcmc.thin = static_cast<int>(json_number(m, "thin", config.mcmc.thin, "mcmc"));
    config.mcmc.n_chains = static_cast<int>(json_number(m, "chains", config.mcmc.n_chains, "mcmc"));
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_integer() || m.at("seed").get<long long>() < 0)
        throw ValidationError("mcmc key 'seed' must be a non-negative integer");
      config.mcmc.seed = m.at("seed").get<std::uint64_t>();
    }
    if (m.contains("adapt")) {
      if (!m.at("adapt").is_boolean()) throw ValidationError("mcmc key 'adapt' must be a boolean");
      config.mcmc.adapt = m.at("adapt").get<bool>();
    }
    config.mcmc.init_step = json_number(m, "init_step", config.mcmc.init_step, "mcmc");
  }

  if (j.contains("vertex_order"))
    config.vertex_order = json_string_array(j.at("vertex_order"), "config key 'vertex_order'");

  if (j.contains("log_transform")) {
    if (!j.at("log_transform").is_boolean())
      throw ValidationError("config key 'log_transform' must be a boolean");
    config.log_transform = j.at("log_transform").get<bool>();
  }

  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string())
      throw ValidationError("config key 'output_dir' must be a string");
    config.output_dir = j.at("output_dir").get<std::string>();
  }

  config.validate();
  return config;
}

std::string RunConfig::to_json_text(const Dataset& data) const {
  ordered_json j;
  j["model"] = model;
  j["disease_order"] = {data.disease_names[0], data.disease_names[1]};
  ordered_json cov = ordered_json::object();
  for (int i = 0; i < 2; ++i)
    cov[data.disease_names[i]] = std::vector<std::string>(data.coef_names[i].begin() + 1,
                                                          data.coef_names[i].end());
  j["covariates"] = cov;
  j["priors"] = {{"a_tau", prior.a_tau},       {"b_tau", prior.b_tau},
                 {"a_sigma", prior.a_sigma},   {"b_sigma", prior.b_sigma},
                 {"beta_var", prior.beta_var}, {"eta_var", prior.eta_var}};
  j["mcmc"] = {{"iterations", mcmc.iterations}, {"burn_in", mcmc.burn_in},
               {"thin", mcmc.thin},             {"chains", mcmc.n_chains},
               {"seed", mcmc.seed},             {"adapt", mcmc.adapt},
               {"init_step", mcmc.init_step}};
  j["vertex_order"] = data.graph.ids();
  j["log_transform"] = log_transform;
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

void SimulationTruth::validate() const {
  model_kind(model);
  if (disease_names[0].empty() || disease_names[1].empty() ||
      disease_names[0] == disease_names[1])
    throw ValidationError("truth diseases must be two distinct non-empty names");
  if (beta[0].size() < 1 || beta[0].size() != beta[1].size())
    throw ValidationError("truth beta1 and beta2 must have the same non-zero length");
  for (int i = 0; i < 2; ++i) {
    if (!(sigma2[i] > 0)) throw ValidationError("truth sigma2 must be positive");
    if (!(tau[i] > 0)) throw ValidationError("truth tau must be positive");
    check_rho_domain(rho[i]);
  }
}

SimulationTruth SimulationTruth::from_json_text(const std::string& text) {
  const ordered_json j = parse_json_text(text, "truth");
  require_keys(j, {"diseases", "model", "beta1", "beta2", "sigma2", "tau", "rho", "eta", "seed"},
               "truth");

  SimulationTruth truth;
  if (j.contains("diseases")) {
    const auto names = json_string_array(j.at("diseases"), "truth key 'diseases'");
    if (names.size() != 2) throw ValidationError("truth key 'diseases' must list two names");
    truth.disease_names = {names[0], names[1]};
  }
  if (j.contains("model")) {
    if (!j.at("model").is_string()) throw ValidationError("truth key 'model' must be a string");
    truth.model = j.at("model").get<std::string>();
  }
  truth.beta[0] = json_vector(j, "beta1", "truth");
  truth.beta[1] = json_vector(j, "beta2", "truth");
  const auto pair_of = [&](const char* key) {
    const Eigen::VectorXd v = json_vector(j, key, "truth");
    if (v.size() != 2)
      throw ValidationError(std::string("truth key '") + key + "' must have two entries");
    return std::array<double, 2>{v(0), v(1)};
  };
  truth.sigma2 = pair_of("sigma2");
  truth.tau = pair_of("tau");
  truth.rho = pair_of("rho");
  const auto eta = pair_of("eta");
  truth.eta = LinkingParams{eta[0], eta[1]};
  if (!j.contains("seed")) throw ValidationError("truth is missing key 'seed'");
  if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0)
    throw ValidationError("truth key 'seed' must be a non-negative integer");
  truth.seed = j.at("seed").get<std::uint64_t>();

  truth.validate();
  return truth;
}

std::string SimulationTruth::to_json_text(const Eigen::VectorXd* w) const {
  ordered_json j;
  j["diseases"] = {disease_names[0], disease_names[1]};
  j["model"] = model;
  j["beta1"] = to_std(beta[0]);
  j["beta2"] = to_std(beta[1]);
  j["sigma2"] = {sigma2[0], sigma2[1]};
  j["tau"] = {tau[0], tau[1]};
  j["rho"] = {rho[0], rho[1]};
  j["eta"] = {eta.eta0, eta.eta1};
  j["seed"] = seed;
  if (w) j["w"] = to_std(*w);
  return j.dump(2) + "\n";
}

Dataset parse_dataset_csv(const std::string& text, const RegionGraph& graph,
                          const RunConfig& config) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError("dataset CSV is empty");

  auto header = split_csv_line(lines[0], 1);
  for (auto& h : header) h = trim(h);
  if (header.empty() || header[0] != "region")
    throw ValidationError("dataset header must start with 'region'");
  for (std::size_t a = 1; a < header.size(); ++a)
    for (std::size_t b = a + 1; b < header.size(); ++b)
      if (header[a] == header[b])
        throw ValidationError("duplicate dataset column '" + header[a] + "'");

  std::vector<int> y_cols;
  std::vector<int> cov_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("y_", 0) == 0) y_cols.push_back(static_cast<int>(c));
    else cov_cols.push_back(static_cast<int>(c));
  }
  if (y_cols.size() != 2)
    throw ValidationError("dataset needs exactly two outcome columns named y_<disease>, found " +
                          std::to_string(y_cols.size()));
  std::array<std::string, 2> diseases{header[y_cols[0]].substr(2), header[y_cols[1]].substr(2)};
  if (diseases[0].empty() || diseases[1].empty())
    throw ValidationError("outcome columns must be named y_<disease>");

  if (!config.disease_order[0].empty()) {
    const auto& want = config.disease_order;
    if (want[0] == diseases[1] && want[1] == diseases[0]) {
      std::swap(y_cols[0], y_cols[1]);
      std::swap(diseases[0], diseases[1]);
    } else if (!(want[0] == diseases[0] && want[1] == diseases[1])) {
      throw ValidationError("disease_order [" + want[0] + ", " + want[1] +
                            "] does not match the outcome columns [" + diseases[0] + ", " +
                            diseases[1] + "]");
    }
  }

  const int k = graph.size();
  Eigen::MatrixXd y(k, 2);
  Eigen::MatrixXd cov(k, static_cast<Eigen::Index>(cov_cols.size()));
  std::vector<bool> seen(static_cast<std::size_t>(k), false);

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    auto fields = split_csv_line(lines[li], line_no);
    if (fields.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    const std::string region = trim(fields[0]);
    const int idx = graph.index_of(region);
    if (idx < 0)
      throw ValidationError("line " + std::to_string(line_no) + ": region '" + region +
                            "' is not in the graph");
    if (seen[static_cast<std::size_t>(idx)])
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate region '" + region +
                            "'");
    seen[static_cast<std::size_t>(idx)] = true;
    const auto cell = [&](int c) {
      return parse_double(fields[static_cast<std::size_t>(c)],
                          "line " + std::to_string(line_no) + ", column '" +
                              header[static_cast<std::size_t>(c)] + "'");
    };
    y(idx, 0) = cell(y_cols[0]);
    y(idx, 1) = cell(y_cols[1]);
    for (std::size_t cc = 0; cc < cov_cols.size(); ++cc)
      cov(idx, static_cast<Eigen::Index>(cc)) = cell(cov_cols[cc]);
  }
  for (int i = 0; i < k; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw ValidationError("region '" + graph.ids()[static_cast<std::size_t>(i)] +
                            "' has no data row");

  std::vector<std::string> cov_names;
  for (const int c : cov_cols) cov_names.push_back(header[static_cast<std::size_t>(c)]);

  for (const auto& [key, unused] : config.covariates_by_disease)
    if (key != diseases[0] && key != diseases[1])
      throw ValidationError("covariates key '" + key + "' does not match a disease");

  std::array<Eigen::MatrixXd, 2> x;
  std::array<std::vector<std::string>, 2> coef_names;
  for (int i = 0; i < 2; ++i) {
    std::vector<std::string> wanted;
    const auto it = config.covariates_by_disease.find(diseases[i]);
    if (it != config.covariates_by_disease.end()) wanted = it->second;
    else if (config.covariates_shared) wanted = *config.covariates_shared;
    else wanted = cov_names;

    x[i] = Eigen::MatrixXd::Ones(k, 1 + static_cast<Eigen::Index>(wanted.size()));
    coef_names[i] = {"intercept"};
    for (std::size_t wcol = 0; wcol < wanted.size(); ++wcol) {
      const auto pos = std::find(cov_names.begin(), cov_names.end(), wanted[wcol]);
      if (pos == cov_names.end())
        throw ValidationError("unknown covariate column '" + wanted[wcol] + "'");
      x[i].col(1 + static_cast<Eigen::Index>(wcol)) =
          cov.col(static_cast<Eigen::Index>(pos - cov_names.begin()));
      coef_names[i].push_back(wanted[wcol]);
    }
  }

  if (config.log_transform) {
    for (int i = 0; i < 2; ++i)
      for (int r = 0; r < k; ++r) {
        if (!(y(r, i) > 0))
          throw ValidationError("log transform needs positive outcomes; region '" +
                                graph.ids()[static_cast<std::size_t>(r)] + "', column 'y_" +
                                diseases[static_cast<std::size_t>(i)] + "'");
        y(r, i) = std::log(y(r, i));
      }
  }

  Dataset data{graph, diseases, std::move(y), std::move(x), std::move(coef_names)};
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& csv_path, const std::string& graph_path,
                     const RunConfig& config) {
  const RegionGraph graph = RegionGraph::load(graph_path);
  const RegionGraph ordered =
      config.vertex_order.empty() ? graph : graph.reordered(config.vertex_order);
  return parse_dataset_csv(read_text_file(csv_path), ordered, config);
}

SimulationResult simulate_dataset(const RegionGraph& graph, const SimulationTruth& truth) {
  truth.validate();
  const int k = graph.size();
  const int p = static_cast<int>(truth.beta[0].size());

  RngStream rng(truth.seed);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(k, p);
  for (int j = 1; j < p; ++j)
    for (int r = 0; r < k; ++r) x(r, j) = rng.normal();

  BdagarSpec spec{model_kind(truth.model), truth.rho[0], truth.rho[1],
                  truth.tau[0],            truth.tau[1], truth.eta};
  const JointGaussian joint = joint_precision(spec, graph);
  const SparseCholesky chol(joint.qw);
  const Eigen::VectorXd w = chol.sample_precision(rng);

  Eigen::MatrixXd y(k, 2);
  y.col(0) = x * truth.beta[0] + w.head(k) + std::sqrt(truth.sigma2[0]) * rng.normal_vector(k);
  y.col(1) = x * truth.beta[1] + w.tail(k) + std::sqrt(truth.sigma2[1]) * rng.normal_vector(k);

  std::ostringstream csv;
  csv << "region,y_" << truth.disease_names[0] << ",y_" << truth.disease_names[1];
  for (int j = 1; j < p; ++j) csv << ",x" << j;
  csv << "\n";
  for (int r = 0; r < k; ++r) {
    csv << csv_field(graph.ids()[static_cast<std::size_t>(r)]) << ',' << format_sig6(y(r, 0))
        << ',' << format_sig6(y(r, 1));
    for (int j = 1; j < p; ++j) csv << ',' << format_sig6(x(r, j));
    csv << "\n";
  }

  std::string text = csv.str();
  Dataset data = parse_dataset_csv(text, graph, RunConfig{});
  return SimulationResult{std::move(data), std::move(text), w};
}

std::string values_csv_text(std::vector<RegionValue> values) {
  std::sort(values.begin(), values.end(),
            [](const RegionValue& a, const RegionValue& b) { return a.region < b.region; });
  std::ostringstream out;
  out << "region,mean,lo,hi\n";
  for (const auto& v : values)
    out << csv_field(v.region) << ',' << format_sig6(v.mean) << ',' << format_sig6(v.lo) << ','
        << format_sig6(v.hi) << "\n";
  return out.str();
}

void export_values_csv(const std::vector<RegionValue>& values, const std::string& path) {
  write_text_file(path, values_csv_text(values));
}

std::vector<RegionValue> parse_values_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != "region,mean,lo,hi")
    throw ValidationError("values CSV must have header 'region,mean,lo,hi'");
  std::vector<RegionValue> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_line(lines[li], line_no);
    if (fields.size() != 4)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields");
    const std::string where = "line " + std::to_string(line_no);
    out.push_back({trim(fields[0]), parse_double(fields[1], where + ", column 'mean'"),
                   parse_double(fields[2], where + ", column 'lo'"),
                   parse_double(fields[3], where + ", column 'hi'")});
  }
  return out;
}

std::string choropleth_text(const std::string& geojson_text,
                            const std::vector<RegionValue>& values,
                            const std::string& id_property, const std::string& value_field) {
  ordered_json j = parse_json_text(geojson_text, "GeoJSON");
  if (!j.is_object() || j.value("type", "") != "FeatureCollection" || !j.contains("features") ||
      !j.at("features").is_array())
    throw ValidationError("malformed GeoJSON: expected a FeatureCollection with a features array");

  std::map<std::string, const RegionValue*> by_region;
  for (const auto& v : values) by_region[v.region] = &v;

  std::vector<std::string> unmatched;
  auto& features = j.at("features");
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& feature = features[i];
    if (!feature.is_object() || !feature.contains("properties") ||
        !feature.at("properties").is_object())
      throw ValidationError("feature " + std::to_string(i) + " has no properties object");
    auto& props = feature.at("properties");
    if (!props.contains(id_property))
      throw ValidationError("feature " + std::to_string(i) + " is missing property '" +
                            id_property + "'");
    const auto& idv = props.at(id_property);
    std::string id;
    if (idv.is_string()) id = idv.get<std::string>();
    else if (idv.is_number_integer()) id = std::to_string(idv.get<long long>());
    else
      throw ValidationError("feature " + std::to_string(i) + " property '" + id_property +
                            "' must be a string or integer id");
    const auto it = by_region.find(id);
    if (it == by_region.end()) {
      unmatched.push_back(id);
      continue;
    }
    props[value_field] = it->second->mean;
    props[value_field + "_lo"] = it->second->lo;
    props[value_field + "_hi"] = it->second->hi;
  }
  if (!unmatched.empty()) {
    std::string list = unmatched[0];
    for (std::size_t i = 1; i < unmatched.size(); ++i) list += ", " + unmatched[i];
    throw ValidationError("GeoJSON ids not present in values: " + list);
  }
  return j.dump(2) + "\n";
}

void export_choropleth(const std::vector<RegionValue>& values, const std::string& geojson_path,
                       const std::string& id_property, const std::string& value_field,
                       const std::string& out_path) {
  write_text_file(out_path,
                  choropleth_text(read_text_file(geojson_path), values, id_property, value_field));
}

std::string fit_label(const std::string& model, const std::array<std::string, 2>& diseases) {
  return model + " [" + diseases[1] + "|" + diseases[0] + "]";
}

std::string draws_csv_text(const PosteriorDraws& draws) {
  std::ostringstream out;
  out << "chain,iteration";
  for (const auto& name : draws.names) out << ',' << csv_field(name);
  out << "\n";
  for (int r = 0; r < draws.rows(); ++r) {
    out << (draws.chain_of_row[static_cast<std::size_t>(r)] + 1) << ','
        << draws.iteration_of_row[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < draws.values.cols(); ++c)
      out << ',' << format_full(draws.values(r, c));
    out << "\n";
  }
  return out.str();
}

PosteriorDraws parse_draws_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError("draws CSV is empty");
  auto header = split_csv_line(lines[0], 1);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
    throw ValidationError("draws CSV header must start with 'chain,iteration'");

  PosteriorDraws draws;
  draws.names.assign(header.begin() + 2, header.end());
  const auto count_prefix = [&](const std::string& prefix) {
    int n = 0;
    for (const auto& name : draws.names)
      if (name.rfind(prefix, 0) == 0) ++n;
    return n;
  };
  draws.layout = DrawsLayout{count_prefix("beta1_"), count_prefix("beta2_"), count_prefix("w1_")};
  if (draws.layout.total() != static_cast<int>(draws.names.size()))
    throw ValidationError("draws CSV columns do not form a recognized layout");

  std::vector<std::vector<double>> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_line(lines[li], line_no);
    if (fields.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
    const std::string where = "line " + std::to_string(line_no);
    const long chain = parse_long(fields[0], where + ", column 'chain'");
    if (chain < 1) throw ValidationError(where + ": chain indices are 1-based");
    draws.chain_of_row.push_back(static_cast<int>(chain) - 1);
    draws.iteration_of_row.push_back(
        static_cast<int>(parse_long(fields[1], where + ", column 'iteration'")));
    std::vector<double> row;
    row.reserve(draws.names.size());
    for (std::size_t c = 2; c < fields.size(); ++c)
      row.push_back(parse_double(fields[c], where + ", column '" + header[c] + "'"));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("draws CSV has no draws");

  draws.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(draws.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      draws.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  draws.n_chains = *std::max_element(draws.chain_of_row.begin(), draws.chain_of_row.end()) + 1;
  return draws;
}

FitResult run_fit(const RegionGraph& graph, const std::string& csv_text, const RunConfig& config) {
  config.validate();
  const RegionGraph ordered =
      config.vertex_order.empty() ? graph : graph.reordered(config.vertex_order);
  Dataset data = parse_dataset_csv(csv_text, ordered, config);
  PosteriorDraws draws = run_mcmc(data, config.kind(), config.prior, config.mcmc);
  std::vector<SummaryRow> summary = summarize(draws);
  WaicReport report = waic(pointwise_log_lik(draws, data));
  return FitResult{config, std::move(data), std::move(draws), std::move(summary), report};
}

void write_fit_directory(const FitResult& fit, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto at = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

  write_text_file(at("draws.csv"), draws_csv_text(fit.draws));

  std::ostringstream summary;
  summary << "param,mean,lo,hi,ess,summary\n";
  for (const auto& row : fit.summary) {
    summary << csv_field(row.name) << ',' << format_sig6(row.mean) << ',' << format_sig6(row.lo)
            << ',' << format_sig6(row.hi) << ',';
    if (std::isfinite(row.ess)) summary << format_sig6(row.ess);
    summary << ',' << csv_field(row.formatted) << "\n";
  }
  write_text_file(at("summary.csv"), summary.str());

  ordered_json waic_json = {{"lppd", fit.waic_report.lppd},
                            {"p_waic", fit.waic_report.p_waic},
                            {"waic", fit.waic_report.waic}};
  write_text_file(at("waic.json"), waic_json.dump(2) + "\n");

  write_text_file(at("config_echo.json"), fit.config.to_json_text(fit.data));

  ordered_json acceptance;
  acceptance["target"] = 0.40;
  std::vector<double> rho1_rates, rho2_rates;
  for (const auto& a : fit.draws.acceptance) {
    rho1_rates.push_back(a[0]);
    rho2_rates.push_back(a[1]);
  }
  acceptance["rho_1"] = rho1_rates;
  acceptance["rho_2"] = rho2_rates;
  write_text_file(at("acceptance.json"), acceptance.dump(2) + "\n");

  write_text_file(at("graph.txt"), fit.data.graph.to_edge_list_text());
}

LoadedFit read_fit_directory(const std::string& dir) {
  const auto at = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  PosteriorDraws draws = parse_draws_csv(read_text_file(at("draws.csv")));
  RegionGraph graph = RegionGraph::parse(read_text_file(at("graph.txt")));
  if (graph.size() != draws.layout.k)
    throw ValidationError("fit directory '" + dir + "': graph and draws disagree on k");

  const ordered_json echo = parse_json_text(read_text_file(at("config_echo.json")), "config echo");
  const std::string model = echo.value("model", "bdagar");
  const auto order = json_string_array(echo.at("disease_order"), "config echo disease_order");
  if (order.size() != 2) throw ValidationError("config echo disease_order must list two diseases");
  return LoadedFit{std::move(draws), std::move(graph), model_kind(model), {order[0], order[1]},
                   model};
}

WaicReport read_waic_json(const std::string& dir) {
  const auto path = (std::filesystem::path(dir) / "waic.json").string();
  const ordered_json j = parse_json_text(read_text_file(path), "waic.json");
  for (const char* key : {"lppd", "p_waic", "waic"})
    if (!j.contains(key) || !j.at(key).is_number())
      throw ValidationError(path + ": missing numeric key '" + key + "'");
  WaicReport report;
  report.lppd = j.at("lppd").get<double>();
  report.p_waic = j.at("p_waic").get<double>();
  report.waic = j.at("waic").get<double>();
  return report;
}

}  // namespace bdagar
