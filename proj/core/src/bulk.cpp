#include "netcvx/bulk.hpp"

#include <algorithm>

#include "netcvx/error.hpp"

namespace netcvx {

namespace {

void require_columns(const std::vector<std::string>& wanted, const std::vector<std::string>& present) {
  for (const std::string& name : wanted)
    if (std::find(present.begin(), present.end(), name) == present.end())
      throw Error(ErrorCode::MissingColumn, "template references column '" + name + "' absent from data");
}

}  // namespace

void add_node_objectives_bulk(ProblemGraph& g, const ObjectiveTemplate& t, const NodeDataTable& data) {
  require_columns(symbols(t), data.columns);
  for (const NodeRecord& row : data.rows) {
    if (g.has_node(row.id)) {
      InstantiatedObjective inst = instantiate(t, row.values, g.node(row.id).dim);
      g.set_node_objective(row.id, std::move(inst.objective), std::move(inst.box));
    } else {
      const std::size_t dim = infer_dim(t, row.values);
      InstantiatedObjective inst = instantiate(t, row.values, dim);
      g.add_node(NodeSpec{row.id, dim, std::move(inst.objective), std::move(inst.box)});
    }
  }
}

void add_edge_objectives_bulk(ProblemGraph& g, const EdgeObjectiveTemplate& t,
                              const std::optional<EdgeDataTable>& edge_data) {
  if (!edge_data) {
    require_columns(symbols(t), {});
    const std::vector<EdgeAtomSpec> objective = instantiate(t, DataRow{});
    std::vector<EdgeKey> keys;
    keys.reserve(g.edge_count());
    for (const auto& [key, spec] : g.edges()) keys.push_back(key);
    for (const EdgeKey& key : keys) g.set_edge_objective(key.first, key.second, objective);
    return;
  }
  require_columns(symbols(t), edge_data->columns);
  for (const EdgeRecord& row : edge_data->rows) {
    if (!g.has_edge(row.j, row.k))
      throw Error(ErrorCode::UnknownEdge,
                  "edge (" + std::to_string(row.j.value) + ", " + std::to_string(row.k.value) + ") does not exist");
    g.set_edge_objective(row.j, row.k, instantiate(t, row.values));
  }
}

}  // namespace netcvx
