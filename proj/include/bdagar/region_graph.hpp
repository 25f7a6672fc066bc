#pragma once

#include <Eigen/Sparse>

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bdagar {

// An areal map as an ordered vertex set with undirected edges. The vertex
// order is the order of ids(): position 0 is the first region, and the
// autoregressive neighbor sets N(i) are taken relative to this order.
// Immutable after construction; reordering produces a new graph.
class RegionGraph {
public:
  // ids are the regions in order; edges are index pairs into ids.
  RegionGraph(std::vector<std::string> ids, std::vector<std::pair<int, int>> edges);

  // Edge-list text ("a b" per line, '#' comments, optional "nodes: a,b,..."
  // header for isolated vertices) or the JSON alternative
  // {"nodes": [...], "edges": [["a","b"], ...]}; dispatches on content.
  static RegionGraph parse(const std::string& text);
  static RegionGraph parse_edge_list(const std::string& text);
  static RegionGraph parse_json(const std::string& text);
  static RegionGraph load(const std::string& path);

  // Rook-adjacency rows x cols lattice in row-major order, ids "r<i>c<j>".
  static RegionGraph grid(int rows, int cols);

  // Same edge set under a new vertex order; order must be a permutation of ids().
  RegionGraph reordered(const std::vector<std::string>& order) const;

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  // Unique edges with i < j, sorted.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  // Full (undirected) neighbor lists per vertex, ascending.
  const std::vector<std::vector<int>>& neighbors() const { return nbrs_; }
  std::vector<int> degrees() const;
  // Binary adjacency matrix M, symmetric with zero diagonal.
  Eigen::SparseMatrix<double> adjacency() const;
  // Position of id under the current order, -1 if absent.
  int index_of(const std::string& id) const;

  std::string to_edge_list_text() const;
  std::string to_json_text() const;

private:
  std::vector<std::string> ids_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> nbrs_;
  std::unordered_map<std::string, int> index_;
};

// Ordered-neighbor sets N(i) = {j < i : j ~ i} and their sizes n_<i.
struct NeighborSets {
  std::vector<std::vector<int>> preceding;  // per position, ascending
  std::vector<int> counts;                  // n_<i, counts[0] == 0

  static NeighborSets of(const RegionGraph& graph);
};

}  // namespace bdagar
