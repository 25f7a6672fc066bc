#include "bdagar/region_graph.hpp"

#include "bdagar/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace bdagar {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RegionGraph::RegionGraph(std::vector<std::string> ids, std::vector<std::pair<int, int>> edges)
    : ids_(std::move(ids)) {
  const int k = static_cast<int>(ids_.size());
  if (k < 1) throw ValidationError("graph must have at least one region");
  for (int i = 0; i < k; ++i) {
    if (!index_.emplace(ids_[i], i).second)
      throw ValidationError("duplicate region id '" + ids_[i] + "'");
  }
  std::set<std::pair<int, int>> uniq;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= k || b >= k)
      throw ValidationError("edge index out of range");
    if (a == b) throw ValidationError("self-loop at region '" + ids_[a] + "'");
    uniq.emplace(std::min(a, b), std::max(a, b));
  }
  edges_.assign(uniq.begin(), uniq.end());
  nbrs_.resize(k);
  for (auto [a, b] : edges_) {
    nbrs_[a].push_back(b);
    nbrs_[b].push_back(a);
  }
  for (auto& n : nbrs_) std::sort(n.begin(), n.end());
}

RegionGraph RegionGraph::parse(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '{' ? parse_json(text) : parse_edge_list(text);
  }
  throw ValidationError("empty graph document");
}

RegionGraph RegionGraph::parse_edge_list(const std::string& text) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;
  std::vector<std::pair<int, int>> edges;
  auto intern = [&](const std::string& id) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    const int i = static_cast<int>(ids.size());
    ids.push_back(id);
    index.emplace(id, i);
    return i;
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("nodes:", 0) == 0) {
      std::istringstream nodes(line.substr(6));
      std::string id;
      while (std::getline(nodes, id, ',')) {
        id = trim(id);
        if (!id.empty()) intern(id);
      }
      continue;
    }
    const auto toks = split_tokens(line);
    if (toks.size() != 2)
      throw ValidationError("line " + std::to_string(lineno) + ": expected '<id_a> <id_b>'");
    if (toks[0] == toks[1])
      throw ValidationError("line " + std::to_string(lineno) + ": self-loop at '" + toks[0] + "'");
    const int a = intern(toks[0]);
    const int b = intern(toks[1]);
    edges.emplace_back(a, b);
  }
  if (ids.empty()) throw ValidationError("graph document declares no regions");
  return RegionGraph(std::move(ids), std::move(edges));
}

RegionGraph RegionGraph::parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid graph JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw ValidationError("graph JSON must contain a \"nodes\" array");
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;
  for (const auto& n : doc["nodes"]) {
    if (!n.is_string()) throw ValidationError("graph JSON node ids must be strings");
    const std::string id = n.get<std::string>();
    if (!index.emplace(id, static_cast<int>(ids.size())).second)
      throw ValidationError("duplicate region id '" + id + "'");
    ids.push_back(id);
  }
  std::vector<std::pair<int, int>> edges;
  if (doc.contains("edges")) {
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        throw ValidationError("graph JSON edges must be [\"a\",\"b\"] pairs");
      auto a = index.find(e[0].get<std::string>());
      auto b = index.find(e[1].get<std::string>());
      if (a == index.end() || b == index.end())
        throw ValidationError("graph JSON edge references unknown region");
      edges.emplace_back(a->second, b->second);
    }
  }
  return RegionGraph(std::move(ids), std::move(edges));
}

RegionGraph RegionGraph::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

RegionGraph RegionGraph::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("grid dimensions must be positive");
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      ids.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
  std::vector<std::pair<int, int>> edges;
  auto at = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(at(r, c), at(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(at(r, c), at(r + 1, c));
    }
  }
  return RegionGraph(std::move(ids), std::move(edges));
}

RegionGraph RegionGraph::reordered(const std::vector<std::string>& order) const {
  if (order.size() != ids_.size())
    throw ValidationError("reorder permutation has " + std::to_string(order.size()) +
                          " ids, graph has " + std::to_string(ids_.size()));
  std::vector<int> new_pos(ids_.size(), -1);
  for (std::size_t p = 0; p < order.size(); ++p) {
    const int old = index_of(order[p]);
    if (old < 0) throw ValidationError("reorder permutation names unknown region '" + order[p] + "'");
    if (new_pos[old] != -1)
      throw ValidationError("reorder permutation repeats region '" + order[p] + "'");
    new_pos[old] = static_cast<int>(p);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(edges_.size());
  for (auto [a, b] : edges_) edges.emplace_back(new_pos[a], new_pos[b]);
  return RegionGraph(order, std::move(edges));
}

std::vector<int> RegionGraph::degrees() const {
  std::vector<int> d(ids_.size());
  for (std::size_t i = 0; i < nbrs_.size(); ++i) d[i] = static_cast<int>(nbrs_[i].size());
  return d;
}

Eigen::SparseMatrix<double> RegionGraph::adjacency() const {
  const int k = size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * edges_.size());
  for (auto [a, b] : edges_) {
    trips.emplace_back(a, b, 1.0);
    trips.emplace_back(b, a, 1.0);
  }
  Eigen::SparseMatrix<double> m(k, k);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

int RegionGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::string RegionGraph::to_edge_list_text() const {
  std::ostringstream out;
  out << "nodes: ";
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (i) out << ",";
    out << ids_[i];
  }
  out << "\n";
  // edges sorted by id pair, lower id first
  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(edges_.size());
  for (auto [a, b] : edges_) {
    std::string x = ids_[a], y = ids_[b];
    if (y < x) std::swap(x, y);
    named.emplace_back(std::move(x), std::move(y));
  }
  std::sort(named.begin(), named.end());
  for (const auto& [x, y] : named) out << x << " " << y << "\n";
  return out.str();
}

std::string RegionGraph::to_json_text() const {
  nlohmann::json doc;
  doc["nodes"] = ids_;
  std::vector<std::pair<std::string, std::string>> named;
  named.reserve(edges_.size());
  for (auto [a, b] : edges_) {
    std::string x = ids_[a], y = ids_[b];
    if (y < x) std::swap(x, y);
    named.emplace_back(std::move(x), std::move(y));
  }
  std::sort(named.begin(), named.end());
  auto edges = nlohmann::json::array();
  for (const auto& [x, y] : named) edges.push_back({x, y});
  doc["edges"] = edges;
  return doc.dump(2) + "\n";
}

NeighborSets NeighborSets::of(const RegionGraph& graph) {
  const int k = graph.size();
  NeighborSets sets;
  sets.preceding.resize(k);
  sets.counts.assign(k, 0);
  for (int i = 0; i < k; ++i) {
    for (int j : graph.neighbors()[i]) {
      if (j < i) sets.preceding[i].push_back(j);
    }
    sets.counts[i] = static_cast<int>(sets.preceding[i].size());
  }
  return sets;
}

}  // namespace bdagar
