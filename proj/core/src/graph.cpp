#include "netcvx/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "netcvx/error.hpp"

namespace netcvx {

namespace {

std::string name(NodeId id) { return std::to_string(id.value); }

std::string name(NodeId j, NodeId k) { return "(" + name(j) + ", " + name(k) + ")"; }

Box normalized_box(const Box& box, std::size_t dim) {
  const auto expand = [dim](const Vector& v, const char* side) {
    if (v.size() == dim) return v;
    if (v.size() == 1) return Vector(dim, v[0]);
    throw Error(ErrorCode::InvalidBox, std::string("box ") + side + " bound has length " + std::to_string(v.size()));
  };
  Box out{expand(box.lower, "lower"), expand(box.upper, "upper")};
  for (std::size_t i = 0; i < dim; ++i)
    if (std::isnan(out.lower[i]) || std::isnan(out.upper[i]) || out.lower[i] > out.upper[i])
      throw Error(ErrorCode::InvalidBox, "lower > upper at coordinate " + std::to_string(i));
  return out;
}

}  // namespace

void ProblemGraph::validate_node(const NodeSpec& spec) const {
  if (spec.dim == 0) throw Error(ErrorCode::DimensionMismatch, "node " + name(spec.id) + " has dimension 0");
  for (const AtomSpec& atom : spec.objective) validate_atom(atom, spec.dim);
  if (spec.box) {
    for (const AtomSpec& atom : spec.objective)
      if (!is_separable(atom.kind))
        throw Error(ErrorCode::InvalidBox, "node " + name(spec.id) + ": box with non-separable atom " +
                                               std::string(to_string(atom.kind)));
    normalized_box(*spec.box, spec.dim);
  }
}

void ProblemGraph::validate_edge_objective(const EdgeSpec& spec) const {
  const bool differences =
      std::any_of(spec.objective.begin(), spec.objective.end(), [](const EdgeAtomSpec& a) { return a.kind != EdgeAtomKind::Zero; });
  for (const EdgeAtomSpec& atom : spec.objective) validate_edge_atom(atom);
  if (differences && node(spec.j).dim != node(spec.k).dim)
    throw Error(ErrorCode::DimensionMismatch, "edge " + name(spec.j, spec.k) + " joins nodes of different dimension");
}

void ProblemGraph::add_node(NodeSpec spec) {
  if (nodes_.contains(spec.id)) throw Error(ErrorCode::DuplicateNode, "node " + name(spec.id) + " already exists");
  validate_node(spec);
  if (spec.box) spec.box = normalized_box(*spec.box, spec.dim);
  adjacency_[spec.id];
  nodes_.emplace(spec.id, std::move(spec));
}

void ProblemGraph::add_edge(EdgeSpec spec) {
  if (spec.j == spec.k) throw Error(ErrorCode::SelfLoop, "edge " + name(spec.j, spec.k) + " is a self-loop");
  for (NodeId end : {spec.j, spec.k})
    if (!nodes_.contains(end)) throw Error(ErrorCode::UnknownEndpoint, "edge endpoint " + name(end) + " does not exist");
  const EdgeKey key = make_edge_key(spec.j, spec.k);
  if (edges_.contains(key)) throw Error(ErrorCode::DuplicateEdge, "edge " + name(spec.j, spec.k) + " already exists");
  validate_edge_objective(spec);

  for (auto [from, to] : {std::pair{spec.j, spec.k}, std::pair{spec.k, spec.j}}) {
    auto& list = adjacency_[from];
    list.insert(std::upper_bound(list.begin(), list.end(), to), to);
  }
  spec.j = key.first;
  spec.k = key.second;
  edges_.emplace(key, std::move(spec));
}

void ProblemGraph::set_node_objective(NodeId id, std::vector<AtomSpec> objective, std::optional<Box> box) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, "node " + name(id) + " does not exist");
  NodeSpec updated{id, it->second.dim, std::move(objective), std::move(box)};
  validate_node(updated);
  if (updated.box) updated.box = normalized_box(*updated.box, updated.dim);
  it->second = std::move(updated);
}

void ProblemGraph::set_edge_objective(NodeId j, NodeId k, std::vector<EdgeAtomSpec> objective) {
  auto it = edges_.find(make_edge_key(j, k));
  if (it == edges_.end()) throw Error(ErrorCode::UnknownEdge, "edge " + name(j, k) + " does not exist");
  EdgeSpec updated{it->second.j, it->second.k, std::move(objective)};
  validate_edge_objective(updated);
  it->second = std::move(updated);
}

const NodeSpec& ProblemGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, "node " + name(id) + " does not exist");
  return it->second;
}

const EdgeSpec& ProblemGraph::edge(NodeId j, NodeId k) const {
  auto it = edges_.find(make_edge_key(j, k));
  if (it == edges_.end()) throw Error(ErrorCode::UnknownEdge, "edge " + name(j, k) + " does not exist");
  return it->second;
}

const std::vector<NodeId>& ProblemGraph::neighbors(NodeId id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw Error(ErrorCode::UnknownNode, "node " + name(id) + " does not exist");
  return it->second;
}

std::size_t ProblemGraph::total_dim() const {
  std::size_t p = 0;
  for (const auto& [id, spec] : nodes_) p += spec.dim;
  return p;
}

double evaluate_objective(const ProblemGraph& g, const std::map<NodeId, Vector>& x) {
  const auto value_of = [&](NodeId id) -> const Vector& {
    auto it = x.find(id);
    if (it == x.end()) throw Error(ErrorCode::UnknownNode, "no value for node " + name(id));
    if (it->second.size() != g.node(id).dim)
      throw Error(ErrorCode::DimensionMismatch, "value for node " + name(id) + " has wrong dimension");
    return it->second;
  };
  double total = 0.0;
  for (const auto& [id, spec] : g.nodes()) {
    const Vector& xi = value_of(id);
    if (spec.box)
      for (std::size_t i = 0; i < spec.dim; ++i)
        if (xi[i] < spec.box->lower[i] || xi[i] > spec.box->upper[i]) return std::numeric_limits<double>::infinity();
    for (const AtomSpec& atom : spec.objective) total += eval_node_atom(atom, xi);
  }
  for (const auto& [key, spec] : g.edges())
    for (const EdgeAtomSpec& atom : spec.objective) total += eval_edge_atom(atom, value_of(spec.j), value_of(spec.k));
  return total;
}

}  // namespace netcvx
