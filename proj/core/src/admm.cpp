#include "netcvx/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "netcvx/error.hpp"

namespace netcvx {

namespace {

int resolve_threads(int threads) {
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

// Static partition over [0, n). Exceptions thrown by fn are rethrown on the
// calling thread after the barrier.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int t = resolve_threads(threads);
  if (t <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
#ifdef _OPENMP
#pragma omp parallel for num_threads(t) schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

std::span<const double> segment(const Vector& v, std::size_t begin, std::size_t end) {
  return std::span<const double>(v).subspan(begin, end - begin);
}

std::span<double> segment(Vector& v, std::size_t begin, std::size_t end) {
  return std::span<double>(v).subspan(begin, end - begin);
}

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidRho, "rho must be positive and finite");
}

void solve_isolated(SolverState& state) {
  const Layout& L = *state.layout;
  for (std::size_t i = 0; i < L.node_count(); ++i)
    if (L.degree(i) == 0) L.node_ops[i].argmin(segment(state.x, L.x_offset[i], L.x_offset[i + 1]));
  state.isolated_solved = true;
}

}  // namespace

int resolve_thread_count(int requested) { return resolve_threads(requested); }

std::string_view to_string(SolveStatus status) {
  return status == SolveStatus::Converged ? "CONVERGED" : "MAX_ITERS";
}

// ---------------------------------------------------------------------------

std::size_t Layout::index_of(NodeId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id.value) + " not in layout");
  return static_cast<std::size_t>(it - ids.begin());
}

std::size_t Layout::slot_of(NodeId i, NodeId j) const {
  const std::size_t a = index_of(i);
  const std::size_t b = index_of(j);
  auto first = slot_neighbor.begin() + static_cast<std::ptrdiff_t>(slot_begin[a]);
  auto last = slot_neighbor.begin() + static_cast<std::ptrdiff_t>(slot_begin[a + 1]);
  auto it = std::lower_bound(first, last, b);
  if (it == last || *it != b)
    throw Error(ErrorCode::UnknownEdge,
                "no coupled edge (" + std::to_string(i.value) + ", " + std::to_string(j.value) + ")");
  return static_cast<std::size_t>(it - slot_neighbor.begin());
}

std::shared_ptr<const Layout> Layout::build(const ProblemGraph& g, bool drop_uncoupled) {
  auto L = std::make_shared<Layout>();
  const std::size_t n = g.node_count();
  L->ids.reserve(n);
  L->dim.reserve(n);
  L->x_offset.assign(1, 0);
  L->node_ops.reserve(n);
  for (const auto& [id, spec] : g.nodes()) {
    L->ids.push_back(id);
    L->dim.push_back(spec.dim);
    L->x_offset.push_back(L->x_offset.back() + spec.dim);
    L->node_ops.emplace_back(spec.objective, spec.box, spec.dim);
  }

  std::map<EdgeKey, EdgeOperator> ops;
  for (const auto& [key, spec] : g.edges()) {
    EdgeOperator op = EdgeOperator::reduce(spec.objective);
    if (!drop_uncoupled || op.couples()) ops.emplace(key, op);
  }

  L->slot_begin.assign(1, 0);
  L->slot_offset.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId nb : g.neighbors(L->ids[i])) {
      if (!ops.contains(make_edge_key(L->ids[i], nb))) continue;
      L->slot_owner.push_back(i);
      L->slot_neighbor.push_back(L->index_of(nb));
      L->slot_offset.push_back(L->slot_offset.back() + L->dim[i]);
    }
    L->slot_begin.push_back(L->slot_owner.size());
  }

  L->slot_mate.resize(L->slot_count());
  for (std::size_t s = 0; s < L->slot_count(); ++s) {
    const std::size_t j = L->slot_neighbor[s];
    auto first = L->slot_neighbor.begin() + static_cast<std::ptrdiff_t>(L->slot_begin[j]);
    auto last = L->slot_neighbor.begin() + static_cast<std::ptrdiff_t>(L->slot_begin[j + 1]);
    L->slot_mate[s] = static_cast<std::size_t>(std::lower_bound(first, last, L->slot_owner[s]) - L->slot_neighbor.begin());
  }
  for (std::size_t s = 0; s < L->slot_count(); ++s) {
    const std::size_t i = L->slot_owner[s];
    const std::size_t j = L->slot_neighbor[s];
    if (i < j) L->edges.push_back({s, L->slot_mate[s], ops.at(make_edge_key(L->ids[i], L->ids[j]))});
  }
  return L;
}

// ---------------------------------------------------------------------------

std::span<const double> SolverState::x_of(NodeId i) const {
  const std::size_t a = layout->index_of(i);
  return segment(x, layout->x_offset[a], layout->x_offset[a + 1]);
}

std::span<double> SolverState::x_of(NodeId i) {
  const std::size_t a = layout->index_of(i);
  return segment(x, layout->x_offset[a], layout->x_offset[a + 1]);
}

std::span<const double> SolverState::z_of(NodeId i, NodeId j) const {
  const std::size_t s = layout->slot_of(i, j);
  return segment(z, layout->slot_offset[s], layout->slot_offset[s + 1]);
}

std::span<double> SolverState::z_of(NodeId i, NodeId j) {
  const std::size_t s = layout->slot_of(i, j);
  return segment(z, layout->slot_offset[s], layout->slot_offset[s + 1]);
}

std::span<const double> SolverState::u_of(NodeId i, NodeId j) const {
  const std::size_t s = layout->slot_of(i, j);
  return segment(u, layout->slot_offset[s], layout->slot_offset[s + 1]);
}

std::span<double> SolverState::u_of(NodeId i, NodeId j) {
  const std::size_t s = layout->slot_of(i, j);
  return segment(u, layout->slot_offset[s], layout->slot_offset[s + 1]);
}

std::map<NodeId, Vector> SolverState::node_values() const {
  std::map<NodeId, Vector> out;
  for (std::size_t i = 0; i < layout->node_count(); ++i) {
    auto seg = segment(x, layout->x_offset[i], layout->x_offset[i + 1]);
    out.emplace_hint(out.end(), layout->ids[i], Vector(seg.begin(), seg.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace admm {

SolverState initialize(const ProblemGraph& g, double rho0, const std::optional<std::map<NodeId, Vector>>& warm,
                       bool drop_uncoupled) {
  check_rho(rho0);
  SolverState state;
  state.layout = Layout::build(g, drop_uncoupled);
  const Layout& L = *state.layout;
  state.rho = rho0;
  state.x.assign(L.x_offset.back(), 0.0);
  if (warm) {
    for (const auto& [id, value] : *warm) {
      if (!g.has_node(id))
        throw Error(ErrorCode::WarmStartDimMismatch, "warm start names unknown node " + std::to_string(id.value));
      auto xi = state.x_of(id);
      if (value.size() != xi.size())
        throw Error(ErrorCode::WarmStartDimMismatch, "warm start for node " + std::to_string(id.value) +
                                                         " has length " + std::to_string(value.size()));
      std::copy(value.begin(), value.end(), xi.begin());
    }
  }
  state.z.assign(L.slot_offset.back(), 0.0);
  for (std::size_t s = 0; s < L.slot_count(); ++s) {
    const std::size_t i = L.slot_owner[s];
    std::copy_n(state.x.begin() + static_cast<std::ptrdiff_t>(L.x_offset[i]), L.dim[i],
                state.z.begin() + static_cast<std::ptrdiff_t>(L.slot_offset[s]));
  }
  state.z_prev = state.z;
  state.u.assign(state.z.size(), 0.0);
  return state;
}

void x_update(SolverState& state, int threads) {
  const Layout& L = *state.layout;
  if (!state.isolated_solved) solve_isolated(state);
  const double rho = state.rho;
  parallel_for(L.node_count(), threads, [&](std::size_t i) {
    const std::size_t d = L.degree(i);
    if (d == 0) return;
    auto xi = segment(state.x, L.x_offset[i], L.x_offset[i + 1]);
    std::fill(xi.begin(), xi.end(), 0.0);
    for (std::size_t s = L.slot_begin[i]; s < L.slot_begin[i + 1]; ++s) {
      const std::size_t off = L.slot_offset[s];
      for (std::size_t k = 0; k < xi.size(); ++k) xi[k] += state.z[off + k] - state.u[off + k];
    }
    const double dd = static_cast<double>(d);
    for (double& v : xi) v /= dd;
    L.node_ops[i].prox(xi, rho * dd, xi);
  });
}

void z_update(SolverState& state, int threads) {
  const Layout& L = *state.layout;
  std::swap(state.z_prev, state.z);
  if (state.z.size() != state.z_prev.size()) state.z.assign(state.z_prev.size(), 0.0);
  const double rho = state.rho;
  parallel_for(L.edges.size(), threads, [&](std::size_t e) {
    const Layout::Edge& edge = L.edges[e];
    auto za = segment(state.z, L.slot_offset[edge.slot_a], L.slot_offset[edge.slot_a + 1]);
    auto zb = segment(state.z, L.slot_offset[edge.slot_b], L.slot_offset[edge.slot_b + 1]);
    const std::size_t xa = L.x_offset[L.slot_owner[edge.slot_a]];
    const std::size_t xb = L.x_offset[L.slot_owner[edge.slot_b]];
    for (std::size_t k = 0; k < za.size(); ++k) za[k] = state.x[xa + k] + state.u[L.slot_offset[edge.slot_a] + k];
    for (std::size_t k = 0; k < zb.size(); ++k) zb[k] = state.x[xb + k] + state.u[L.slot_offset[edge.slot_b] + k];
    edge.op.prox(za, zb, rho, za, zb);
  });
}

void u_update(SolverState& state, int threads) {
  const Layout& L = *state.layout;
  parallel_for(L.node_count(), threads, [&](std::size_t i) {
    const std::size_t xo = L.x_offset[i];
    for (std::size_t s = L.slot_begin[i]; s < L.slot_begin[i + 1]; ++s) {
      const std::size_t off = L.slot_offset[s];
      for (std::size_t k = 0; k < L.dim[i]; ++k) state.u[off + k] += state.x[xo + k] - state.z[off + k];
    }
  });
}

Residuals residuals(const SolverState& state, const StoppingCriteria& criteria) {
  const Layout& L = *state.layout;
  double r2 = 0.0, s2 = 0.0, x2 = 0.0, z2 = 0.0, u2 = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < L.node_count(); ++i) {
    auto xi = segment(state.x, L.x_offset[i], L.x_offset[i + 1]);
    for (std::size_t s = L.slot_begin[i]; s < L.slot_begin[i + 1]; ++s) {
      auto zs = segment(state.z, L.slot_offset[s], L.slot_offset[s + 1]);
      r2 += squared_distance(xi, zs);
      s2 += squared_distance(zs, segment(state.z_prev, L.slot_offset[s], L.slot_offset[s + 1]));
      x2 += squared_norm(xi);
      z2 += squared_norm(zs);
      u2 += squared_norm(segment(state.u, L.slot_offset[s], L.slot_offset[s + 1]));
      p += xi.size();
    }
  }
  Residuals out;
  out.primal_norm = std::sqrt(r2);
  out.dual_norm = state.rho * std::sqrt(s2);
  const double base = std::sqrt(static_cast<double>(p)) * criteria.eps_abs;
  out.eps_pri = base + criteria.eps_rel * std::max(std::sqrt(x2), std::sqrt(z2));
  out.eps_dual = base + criteria.eps_rel * state.rho * std::sqrt(u2);
  return out;
}

void update_rho(const RhoPolicy& policy, SolverState& state, double primal_norm, double dual_norm) {
  double next = state.rho;
  if (const auto* balance = std::get_if<ResidualBalance>(&policy)) {
    if (primal_norm > balance->mu * dual_norm) next = state.rho * balance->tau_incr;
    else if (dual_norm > balance->mu * primal_norm) next = state.rho / balance->tau_decr;
  } else if (const auto* callback = std::get_if<RhoCallback>(&policy)) {
    next = (*callback)(state.iter, state.rho, primal_norm, dual_norm);
    check_rho(next);
  }
  if (next == state.rho) return;
  // Rescale through the unscaled dual y = rho * u.
  for (double& v : state.u) v = (state.rho * v) / next;
  state.rho = next;
}

SolveResult solve(const ProblemGraph& g, const SolveOptions& options) {
  const StoppingCriteria& crit = options.criteria;
  if (!(crit.eps_abs > 0.0) || !(crit.eps_rel > 0.0) || crit.max_iters == 0)
    throw Error(ErrorCode::InvalidParameter, "stopping tolerances and iteration limit must be positive");
  if (const auto* balance = std::get_if<ResidualBalance>(&options.policy))
    if (!(balance->mu > 1.0) || !(balance->tau_incr > 1.0) || !(balance->tau_decr > 1.0))
      throw Error(ErrorCode::InvalidParameter, "residual balancing needs mu, tau_incr, tau_decr > 1");

  SolverState state = initialize(g, options.rho, options.resume ? std::nullopt : options.warm_x, true);
  if (options.resume) {
    const SolverState& prev = *options.resume;
    const Layout& a = *state.layout;
    const Layout& b = *prev.layout;
    if (a.ids != b.ids || a.dim != b.dim || a.slot_neighbor != b.slot_neighbor || a.slot_begin != b.slot_begin)
      throw Error(ErrorCode::WarmStartDimMismatch, "resume state was produced for a different graph");
    check_rho(prev.rho);
    state.x = prev.x;
    state.z = prev.z;
    state.z_prev = prev.z;
    state.u = prev.u;
    state.rho = prev.rho;
  }

  const int threads = resolve_threads(options.threads);
  std::ostream& trace = options.trace ? *options.trace : std::cout;

  SolveResult result;
  result.rho_initial = state.rho;
  solve_isolated(state);

  if (state.layout->slot_count() == 0) {
    result.status = SolveStatus::Converged;
  } else {
    result.history.reserve(std::min<std::size_t>(crit.max_iters, 4096));
    while (state.iter < crit.max_iters) {
      x_update(state, threads);
      z_update(state, threads);
      u_update(state, threads);
      const Residuals res = residuals(state, crit);
      result.history.push_back({res.primal_norm, res.dual_norm, res.eps_pri, res.eps_dual, state.rho});
      ++state.iter;
      if (options.verbose) {
        char line[160];
        std::snprintf(line, sizeof line, "iter=%zu r=%.6e s=%.6e eps_pri=%.6e eps_dual=%.6e rho=%.6e", state.iter,
                      res.primal_norm, res.dual_norm, res.eps_pri, res.eps_dual, state.rho);
        trace << line << '\n';
      }
      if (res.primal_norm <= res.eps_pri && res.dual_norm <= res.eps_dual) {
        result.status = SolveStatus::Converged;
        break;
      }
      update_rho(options.policy, state, res.primal_norm, res.dual_norm);
    }
  }

  result.iters = state.iter;
  result.rho_final = state.rho;
  result.x_star = state.node_values();
  result.objective = evaluate_objective(g, result.x_star);
  result.final_state = std::move(state);
  return result;
}

}  // namespace admm

}  // namespace netcvx
