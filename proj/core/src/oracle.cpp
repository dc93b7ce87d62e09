#include "netcvx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "netcvx/error.hpp"

namespace netcvx::oracle {

namespace {

double param(const Vector& v, std::size_t i) {
  if (v.empty()) return 0.0;
  return v.size() == 1 ? v[0] : v[i];
}

struct System {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd b;
  std::map<NodeId, std::size_t> offset;
};

System assemble(const ProblemGraph& g) {
  System sys;
  std::size_t p = 0;
  for (const auto& [id, spec] : g.nodes()) {
    sys.offset[id] = p;
    p += spec.dim;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  sys.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (const auto& [id, spec] : g.nodes()) {
    if (spec.box) throw Error(ErrorCode::NotQuadratic, "node " + std::to_string(id.value) + " has a box");
    const std::size_t o = sys.offset[id];
    for (const AtomSpec& atom : spec.objective) {
      for (std::size_t i = 0; i < spec.dim; ++i) {
        const auto row = static_cast<Eigen::Index>(o + i);
        switch (atom.kind) {
          case AtomKind::SumSquares:
            triplets.emplace_back(row, row, 2.0 * atom.weight);
            sys.b[row] += 2.0 * atom.weight * param(atom.shift, i);
            break;
          case AtomKind::Linear:
            sys.b[row] -= atom.weight * param(atom.slope, i);
            break;
          case AtomKind::Zero:
            break;
          default:
            throw Error(ErrorCode::NotQuadratic, "node " + std::to_string(id.value) + " has a non-quadratic atom");
        }
      }
    }
  }
  for (const auto& [key, spec] : g.edges()) {
    double w = 0.0;
    for (const EdgeAtomSpec& atom : spec.objective) {
      if (atom.kind == EdgeAtomKind::SqDiff) w += atom.weight;
      else if (atom.kind != EdgeAtomKind::Zero)
        throw Error(ErrorCode::NotQuadratic, "edge carries a non-quadratic atom");
    }
    if (w == 0.0) continue;
    const std::size_t oj = sys.offset[spec.j];
    const std::size_t ok = sys.offset[spec.k];
    for (std::size_t i = 0; i < g.node(spec.j).dim; ++i) {
      const auto a = static_cast<Eigen::Index>(oj + i);
      const auto c = static_cast<Eigen::Index>(ok + i);
      triplets.emplace_back(a, a, 2.0 * w);
      triplets.emplace_back(c, c, 2.0 * w);
      triplets.emplace_back(a, c, -2.0 * w);
      triplets.emplace_back(c, a, -2.0 * w);
    }
  }
  sys.H.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  sys.H.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

// Every connected component needs a node with positive quadratic weight.
void check_anchored(const ProblemGraph& g) {
  std::map<NodeId, bool> visited;
  for (const auto& [start, spec] : g.nodes()) {
    if (visited[start]) continue;
    bool anchored = false;
    std::vector<NodeId> stack{start};
    visited[start] = true;
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      for (const AtomSpec& atom : g.node(id).objective)
        if (atom.kind == AtomKind::SumSquares && atom.weight > 0.0) anchored = true;
      for (NodeId nb : g.neighbors(id)) {
        bool coupled = false;
        for (const EdgeAtomSpec& atom : g.edge(id, nb).objective)
          if (atom.kind == EdgeAtomKind::SqDiff && atom.weight > 0.0) coupled = true;
        if (coupled && !visited[nb]) {
          visited[nb] = true;
          stack.push_back(nb);
        }
      }
    }
    if (!anchored)
      throw Error(ErrorCode::SingularSystem,
                  "component containing node " + std::to_string(start.value) + " has no positive quadratic term");
  }
}

}  // namespace

std::map<NodeId, Vector> quadratic_oracle(const ProblemGraph& g, double tolerance) {
  System sys = assemble(g);
  check_anchored(g);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tolerance);
  cg.setMaxIterations(std::max<Eigen::Index>(10 * sys.H.rows(), 1000));
  cg.compute(sys.H);
  const Eigen::VectorXd x = sys.b.isZero() ? Eigen::VectorXd::Zero(sys.b.size()) : Eigen::VectorXd(cg.solve(sys.b));
  if (cg.info() != Eigen::Success && !sys.b.isZero())
    throw Error(ErrorCode::SingularSystem, "conjugate gradient did not reach the requested tolerance");
  std::map<NodeId, Vector> out;
  for (const auto& [id, spec] : g.nodes()) {
    const auto o = static_cast<Eigen::Index>(sys.offset[id]);
    out[id] = Vector(x.data() + o, x.data() + o + static_cast<Eigen::Index>(spec.dim));
  }
  return out;
}

double stationarity_residual(const ProblemGraph& g, const std::map<NodeId, Vector>& x) {
  const System sys = assemble(g);
  Eigen::VectorXd v(sys.b.size());
  for (const auto& [id, o] : sys.offset) {
    const Vector& xi = x.at(id);
    for (std::size_t i = 0; i < xi.size(); ++i) v[static_cast<Eigen::Index>(o + i)] = xi[i];
  }
  const double scale = std::max(sys.b.norm(), 1e-300);
  return (sys.H * v - sys.b).norm() / scale;
}

double minimize_1d(const ScalarFn& f, double lower, double upper, double width) {
  long double lo = lower, hi = upper;
  while (hi - lo > width) {
    const long double m1 = lo + (hi - lo) / 3;
    const long double m2 = hi - (hi - lo) / 3;
    if (f(m1) <= f(m2)) hi = m2;
    else lo = m1;
  }
  return static_cast<double>((lo + hi) / 2);
}

double prox_oracle_1d(const ScalarFn& f, double v, double sigma, double lower, double upper, double width) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidParameter, "sigma must be positive");
  const long double lv = v, ls = sigma;
  const ScalarFn phi = [&](long double t) { return f(t) + ls / 2 * (t - lv) * (t - lv); };
  const double start = std::clamp(v, lower, upper);
  double lo = lower, hi = upper;
  // Strong convexity guarantees the doubling search terminates.
  if (!std::isfinite(lo)) {
    double step = 1.0;
    lo = start - step;
    while (phi(lo) <= phi(lo + step / 2)) {
      step *= 2;
      lo = start - step;
    }
  }
  if (!std::isfinite(hi)) {
    double step = 1.0;
    hi = start + step;
    while (phi(hi) <= phi(hi - step / 2)) {
      step *= 2;
      hi = start + step;
    }
  }
  return minimize_1d(phi, lo, hi, width);
}

std::pair<double, double> grid_refine_2d(const PairFn& f, Box2 box, const GridSchedule& schedule) {
  const std::size_t n = std::max<std::size_t>(schedule.points, 3);
  double best1 = (box.lo1 + box.hi1) / 2, best2 = (box.lo2 + box.hi2) / 2;
  while (true) {
    const double h1 = (box.hi1 - box.lo1) / static_cast<double>(n - 1);
    const double h2 = (box.hi2 - box.lo2) / static_cast<double>(n - 1);
    long double best = std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = box.lo1 + h1 * static_cast<double>(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double b = box.lo2 + h2 * static_cast<double>(j);
        const long double value = f(a, b);
        if (value < best) {
          best = value;
          best1 = a;
          best2 = b;
        }
      }
    }
    if (std::max(h1, h2) <= schedule.final_width) break;
    const double k = static_cast<double>(schedule.keep);
    box = {best1 - k * h1, best1 + k * h1, best2 - k * h2, best2 + k * h2};
  }
  return {best1, best2};
}

}  // namespace netcvx::oracle
