#pragma once

// ADMM over a problem graph.
//
// Every edge (j, k) owns two copies of the endpoint variables, z_jk and z_kj,
// with consensus constraints x_j = z_jk and x_k = z_kj. One iteration runs
//
//   x-update  x_i   <- prox_{f_i, rho d_i}( mean_j (z_ij - u_ij) )   per node
//   z-update  (z_jk, z_kj) <- prox_{g_jk, rho}(x_j + u_jk, x_k + u_kj) per edge
//   u-update  u_ij  <- u_ij + x_i - z_ij                               per endpoint
//
// with u the scaled dual. Node and edge phases are bulk-synchronous; reductions
// run in ascending (node id, neighbor id) order so results do not depend on
// the worker count.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "netcvx/atoms.hpp"
#include "netcvx/graph.hpp"

namespace netcvx {

/// Dense layout of the splitting derived from a ProblemGraph. Nodes are indexed
/// in ascending id order; each node owns one slot per coupled neighbor, in
/// ascending neighbor order.
struct Layout {
  std::vector<NodeId> ids;
  std::vector<std::size_t> dim;
  std::vector<std::size_t> x_offset;    // n + 1 entries
  std::vector<std::size_t> slot_begin;  // n + 1 entries
  std::vector<std::size_t> slot_owner;
  std::vector<std::size_t> slot_neighbor;
  std::vector<std::size_t> slot_mate;    // slot of the reverse orientation
  std::vector<std::size_t> slot_offset;  // S + 1 entries into z / u storage
  std::vector<NodeOperator> node_ops;

  struct Edge {
    std::size_t slot_a;  // owned by the lower node index
    std::size_t slot_b;
    EdgeOperator op;
  };
  std::vector<Edge> edges;

  std::size_t node_count() const { return ids.size(); }
  std::size_t slot_count() const { return slot_owner.size(); }
  std::size_t degree(std::size_t node) const { return slot_begin[node + 1] - slot_begin[node]; }

  std::size_t index_of(NodeId id) const;
  /// Throws UnknownEdge if (i, j) is not a coupled orientation.
  std::size_t slot_of(NodeId i, NodeId j) const;

  /// With drop_uncoupled, edges whose objective reduces to zero are left out of
  /// the splitting: they add nothing to the objective and constrain nothing.
  static std::shared_ptr<const Layout> build(const ProblemGraph& g, bool drop_uncoupled);
};

struct SolverState {
  std::shared_ptr<const Layout> layout;
  Vector x;       // stacked node variables
  Vector z;       // stacked endpoint copies
  Vector z_prev;  // z before the last z-update
  Vector u;       // scaled duals, same layout as z
  double rho = 1.0;
  std::size_t iter = 0;
  bool isolated_solved = false;

  std::span<const double> x_of(NodeId i) const;
  std::span<double> x_of(NodeId i);
  std::span<const double> z_of(NodeId i, NodeId j) const;
  std::span<double> z_of(NodeId i, NodeId j);
  std::span<const double> u_of(NodeId i, NodeId j) const;
  std::span<double> u_of(NodeId i, NodeId j);

  std::map<NodeId, Vector> node_values() const;
};

struct StoppingCriteria {
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;
  std::size_t max_iters = 1000;
};

struct ResidualBalance {
  double mu = 10.0;
  double tau_incr = 2.0;
  double tau_decr = 2.0;
};

/// Receives (iteration, rho, primal_norm, dual_norm) and returns the next rho.
using RhoCallback = std::function<double(std::size_t, double, double, double)>;

struct FixedRho {};

using RhoPolicy = std::variant<FixedRho, ResidualBalance, RhoCallback>;

struct Residuals {
  double primal_norm = 0.0;
  double dual_norm = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
};

struct IterationRecord {
  double primal_norm = 0.0;
  double dual_norm = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
  double rho = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

enum class SolveStatus { Converged, MaxIters };

std::string_view to_string(SolveStatus status);

struct SolveOptions {
  StoppingCriteria criteria;
  double rho = 1.0;
  RhoPolicy policy = FixedRho{};
  int threads = 0;  // 0: all available
  bool verbose = false;
  std::ostream* trace = nullptr;  // verbose lines go here; stdout if null
  std::optional<std::map<NodeId, Vector>> warm_x;
  /// Continue from a previous solve of the same graph, duals included.
  std::optional<SolverState> resume;
};

struct SolveResult {
  std::map<NodeId, Vector> x_star;
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  std::size_t iters = 0;
  std::vector<IterationRecord> history;
  double rho_initial = 1.0;
  double rho_final = 1.0;
  SolverState final_state;
};

/// Worker count used for a request; 0 means every available core.
int resolve_thread_count(int requested);

namespace admm {

/// Cold start sets x = 0; a warm start copies the given values. Every z_ij
/// starts at x_i and every u_ij at 0.
SolverState initialize(const ProblemGraph& g, double rho0, const std::optional<std::map<NodeId, Vector>>& warm = {},
                       bool drop_uncoupled = false);

void x_update(SolverState& state, int threads = 1);
void z_update(SolverState& state, int threads = 1);
void u_update(SolverState& state, int threads = 1);
Residuals residuals(const SolverState& state, const StoppingCriteria& criteria);
void update_rho(const RhoPolicy& policy, SolverState& state, double primal_norm, double dual_norm);

SolveResult solve(const ProblemGraph& g, const SolveOptions& options = {});

}  // namespace admm

}  // namespace netcvx
