#pragma once

// Bulk loading: one objective template instantiated against many data rows.

#include <optional>
#include <string>
#include <vector>

#include "netcvx/graph.hpp"
#include "netcvx/objective_dsl.hpp"

namespace netcvx {

struct NodeRecord {
  NodeId id;
  DataRow values;
};

struct NodeDataTable {
  std::vector<std::string> columns;  // column names, excluding id
  std::vector<NodeRecord> rows;
};

struct EdgeRecord {
  NodeId j;
  NodeId k;
  DataRow values;
};

struct EdgeDataTable {
  std::vector<std::string> columns;  // column names, excluding the endpoints
  std::vector<EdgeRecord> rows;
};

/// Existing nodes keep their dimension and get their objective replaced; new
/// nodes are created with the dimension inferred from the row.
void add_node_objectives_bulk(ProblemGraph& g, const ObjectiveTemplate& t, const NodeDataTable& data);

/// Without edge data every edge receives the template (which must then be free
/// of symbols); with edge data only the listed edges do.
void add_edge_objectives_bulk(ProblemGraph& g, const EdgeObjectiveTemplate& t,
                              const std::optional<EdgeDataTable>& edge_data = std::nullopt);

}  // namespace netcvx
