#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "netcvx/atoms.hpp"

namespace netcvx {

struct NodeId {
  std::uint64_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint64_t v) : value(v) {}
  auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

struct NodeSpec {
  NodeId id;
  std::size_t dim = 1;
  std::vector<AtomSpec> objective;
  std::optional<Box> box;
};

/// Endpoints are unordered; the graph stores them with j < k.
struct EdgeSpec {
  NodeId j;
  NodeId k;
  std::vector<EdgeAtomSpec> objective;
};

using EdgeKey = std::pair<NodeId, NodeId>;

inline EdgeKey make_edge_key(NodeId a, NodeId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Undirected problem graph. Node i carries f_i and the size of x_i; edge
/// (j, k) carries g_jk. Construction is single-writer; once a solve starts the
/// graph is only read.
class ProblemGraph {
 public:
  void add_node(NodeSpec spec);
  void add_edge(EdgeSpec spec);

  /// Replaces the objective (and box) of an existing node.
  void set_node_objective(NodeId id, std::vector<AtomSpec> objective, std::optional<Box> box);
  /// Replaces the objective of an existing edge. Throws UnknownEdge.
  void set_edge_objective(NodeId j, NodeId k, std::vector<EdgeAtomSpec> objective);

  bool has_node(NodeId id) const { return nodes_.contains(id); }
  bool has_edge(NodeId j, NodeId k) const { return edges_.contains(make_edge_key(j, k)); }

  const NodeSpec& node(NodeId id) const;
  const EdgeSpec& edge(NodeId j, NodeId k) const;

  /// Ascending neighbor ids.
  const std::vector<NodeId>& neighbors(NodeId id) const;
  std::size_t degree(NodeId id) const { return neighbors(id).size(); }

  const std::map<NodeId, NodeSpec>& nodes() const { return nodes_; }
  const std::map<EdgeKey, EdgeSpec>& edges() const { return edges_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Sum of node dimensions: the length of the stacked solution vector.
  std::size_t total_dim() const;

 private:
  void validate_node(const NodeSpec& spec) const;
  void validate_edge_objective(const EdgeSpec& spec) const;

  std::map<NodeId, NodeSpec> nodes_;
  std::map<EdgeKey, EdgeSpec> edges_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
};

/// Objective value of a full assignment: sum of node and edge atoms. Returns
/// +inf when some node value lies outside its box.
double evaluate_objective(const ProblemGraph& g, const std::map<NodeId, Vector>& x);

}  // namespace netcvx
