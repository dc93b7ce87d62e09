// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "netcvx/admm.hpp"
#include "netcvx/io.hpp"
#include "netcvx/objective_dsl.hpp"
#include "netcvx/oracle.hpp"
#include "test_support.hpp"

using namespace netcvx;
using namespace netcvx::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1. Two-node worked example.
Outcome two_node_example() {
  const ProblemGraph g = two_node_instance();
  const auto start = Clock::now();
  const SolveResult r = admm::solve(g);
  const double elapsed = seconds_since(start);
  const double x1 = r.x_star.at(NodeId{1})[0];
  const double x2 = r.x_star.at(NodeId{2})[0];

  // Ground truth from grid refinement of the objective itself.
  const auto truth = oracle::grid_refine_2d([](long double a, long double b) { return two_node_objective(a, b); },
                                            {-5, 5, -5, 5});
  const bool oracle_ok = std::abs(truth.first + 0.5) <= 1e-5 && std::abs(truth.second + 1.0) <= 1e-5;

  Outcome o;
  o.pass = oracle_ok && r.status == SolveStatus::Converged && r.iters <= 500 && std::abs(x1 + 0.5) <= 1e-3 &&
           std::abs(x2 + 1.0) <= 1e-3 && std::abs(r.objective - 2.5) <= 1e-3 && elapsed < 1.0;
  o.detail = fmt("x=(%.6f, %.6f) objective=%.6f status=%s iters=%zu time=%.4fs grid=(%.7f, %.7f)", x1, x2,
                 r.objective, std::string(to_string(r.status)).c_str(), r.iters, elapsed, truth.first, truth.second);
  return o;
}

// 2. Quadratic equivalence with the linear-system oracle.
Outcome quadratic_equivalence() {
  SolveOptions opts;
  opts.criteria = {1e-6, 1e-6, 200000};
  double worst = 0.0;
  std::size_t max_iters = 0;
  bool all_converged = true;
  const auto start = Clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ProblemGraph g = quadratic_instance(100, 10, seed);
    const SolveResult r = admm::solve(g, opts);
    all_converged = all_converged && r.status == SolveStatus::Converged;
    max_iters = std::max(max_iters, r.iters);
    worst = std::max(worst, relative_error(stack(r.x_star), stack(oracle::quadratic_oracle(g))));
  }
  const double elapsed = seconds_since(start);
  return {all_converged && worst <= 1e-4 && elapsed < 30.0,
          fmt("worst relative error=%.3e max iters=%zu all converged=%d time=%.2fs", worst, max_iters, all_converged,
              elapsed)};
}

// 3. Closed-form proxes against numeric minimization.
oracle::ScalarFn coordinate_fn(const AtomSpec& atom, std::size_t i) {
  const long double w = atom.weight;
  const long double a = atom.shift.empty() ? 0.0L : atom.shift[atom.shift.size() == 1 ? 0 : i];
  const long double c = atom.slope.empty() ? 0.0L : atom.slope[atom.slope.size() == 1 ? 0 : i];
  const long double m = atom.huber_threshold;
  switch (atom.kind) {
    case AtomKind::SumSquares: return [=](long double t) { return w * (t - a) * (t - a); };
    case AtomKind::Norm1: return [=](long double t) { return w * std::fabs(t - a); };
    case AtomKind::Huber:
      return [=](long double t) {
        const long double d = std::fabs(t - a);
        return w * (d <= m ? d * d : m * (2 * d - m));
      };
    case AtomKind::Linear: return [=](long double t) { return w * c * t; };
    default: return [](long double) { return 0.0L; };
  }
}

Outcome prox_correctness() {
  Rng rng(2024);
  double worst_node = 0.0, worst_edge = 0.0;
  std::size_t conservation_violations = 0, conservation_checks = 0;
  double worst_conservation_ulps = 0.0;

  for (AtomKind kind : {AtomKind::SumSquares, AtomKind::Norm1, AtomKind::Norm2, AtomKind::Huber, AtomKind::Linear,
                        AtomKind::Zero}) {
    for (int draw = 0; draw < 1000; ++draw) {
      const std::size_t dim = 1 + rng.index(3);
      const double w = rng.uniform(0.0, 4.0);
      const double sigma = rng.uniform(0.05, 10.0);
      const Vector v = rng.vector(dim, -10, 10);
      AtomSpec atom;
      switch (kind) {
        case AtomKind::SumSquares: atom = atoms::sum_squares(w, rng.vector(dim, -10, 10)); break;
        case AtomKind::Norm1: atom = atoms::norm1(w, rng.vector(dim, -10, 10)); break;
        case AtomKind::Norm2: atom = atoms::norm2(w, rng.vector(dim, -10, 10)); break;
        case AtomKind::Huber: atom = atoms::huber(w, rng.vector(dim, -10, 10), rng.uniform(0.1, 5.0)); break;
        case AtomKind::Linear: atom = atoms::linear(w, rng.vector(dim, -5, 5)); break;
        case AtomKind::Zero: atom = atoms::zero(); break;
      }
      std::optional<Box> box;
      if (is_separable(kind) && rng.index(2) == 0) {
        Box b{Vector(dim), Vector(dim)};
        for (std::size_t i = 0; i < dim; ++i) {
          double lo = rng.uniform(-12, 12), hi = rng.uniform(-12, 12);
          if (lo > hi) std::swap(lo, hi);
          b.lower[i] = rng.index(4) == 0 ? -kInf : lo;
          b.upper[i] = rng.index(4) == 0 ? kInf : hi;
        }
        box = b;
      }
      const Vector got = prox_node(std::vector{atom}, box, {v, sigma});
      if (kind == AtomKind::Norm2) {
        // Reduce to the scalar prox of w|s| along v - a.
        Vector d(dim);
        for (std::size_t i = 0; i < dim; ++i) d[i] = v[i] - atom.shift[i];
        const double r = norm(d);
        const double s = oracle::prox_oracle_1d([w](long double t) { return w * std::fabs(t); }, r, sigma);
        for (std::size_t i = 0; i < dim; ++i)
          worst_node = std::max(worst_node, std::abs(got[i] - (atom.shift[i] + (r > 0 ? s * d[i] / r : 0.0))));
      } else {
        for (std::size_t i = 0; i < dim; ++i) {
          const double lo = box ? box->lower[i] : -kInf;
          const double hi = box ? box->upper[i] : kInf;
          worst_node = std::max(worst_node, std::abs(got[i] - oracle::prox_oracle_1d(coordinate_fn(atom, i), v[i], sigma, lo, hi)));
        }
      }
    }
  }

  for (EdgeAtomKind kind : {EdgeAtomKind::Zero, EdgeAtomKind::SqDiff, EdgeAtomKind::NetLasso, EdgeAtomKind::AbsDiff}) {
    for (int draw = 0; draw < 1000; ++draw) {
      const std::size_t dim = 1 + rng.index(3);
      const long double w = rng.uniform(0.0, 4.0);
      const long double rho = rng.uniform(0.1, 10.0);
      const Vector ca = rng.vector(dim, -10, 10), cb = rng.vector(dim, -10, 10);
      const auto [za, zb] = edge_prox(std::vector{EdgeAtomSpec{kind, static_cast<double>(w)}}, ca, cb, static_cast<double>(rho));

      for (std::size_t i = 0; i < dim; ++i) {
        ++conservation_checks;
        const double lhs = za[i] + zb[i];
        const double rhs = ca[i] + cb[i];
        if (lhs != rhs) {
          ++conservation_violations;
          const double ulp = std::nextafter(std::abs(rhs), kInf) - std::abs(rhs);
          worst_conservation_ulps = std::max(worst_conservation_ulps, std::abs(lhs - rhs) / ulp);
        }
      }

      // Separable kinds decouple per coordinate; network lasso reduces to the line through d.
      auto solve_pair = [&](long double pa, long double pb, const std::function<long double(long double)>& g) {
        const double lo = static_cast<double>(std::min(pa, pb)) - 1.0, hi = static_cast<double>(std::max(pa, pb)) + 1.0;
        return oracle::grid_refine_2d(
            [&](long double p, long double q) {
              return g(p - q) + rho / 2 * (p - pa) * (p - pa) + rho / 2 * (q - pb) * (q - pb);
            },
            {lo, hi, lo, hi});
      };
      std::function<long double(long double)> g;
      switch (kind) {
        case EdgeAtomKind::Zero: g = [](long double) { return 0.0L; }; break;
        case EdgeAtomKind::SqDiff: g = [w](long double t) { return w * t * t; }; break;
        case EdgeAtomKind::NetLasso:
        case EdgeAtomKind::AbsDiff: g = [w](long double t) { return w * std::fabs(t); }; break;
      }
      Vector ea(dim), eb(dim);
      if (kind == EdgeAtomKind::NetLasso) {
        Vector d(dim);
        for (std::size_t i = 0; i < dim; ++i) d[i] = ca[i] - cb[i];
        const double r = norm(d);
        long double pa = 0, pb = 0;
        for (std::size_t i = 0; i < dim; ++i) {
          pa += static_cast<long double>(ca[i]) * d[i] / r;
          pb += static_cast<long double>(cb[i]) * d[i] / r;
        }
        const auto [p, q] = solve_pair(pa, pb, g);
        for (std::size_t i = 0; i < dim; ++i) {
          ea[i] = static_cast<double>(ca[i] + (p - pa) * d[i] / r);
          eb[i] = static_cast<double>(cb[i] + (q - pb) * d[i] / r);
        }
      } else {
        for (std::size_t i = 0; i < dim; ++i) std::tie(ea[i], eb[i]) = solve_pair(ca[i], cb[i], g);
      }
      for (std::size_t i = 0; i < dim; ++i)
        worst_edge = std::max({worst_edge, std::abs(za[i] - ea[i]), std::abs(zb[i] - eb[i])});
    }
  }

  Outcome o;
  o.pass = worst_node <= 1e-6 && worst_edge <= 1e-6 && conservation_violations == 0;
  o.detail = fmt("worst node prox error=%.3e worst edge prox error=%.3e conservation mismatches=%zu/%zu "
                 "(worst %.1f ulp)",
                 worst_node, worst_edge, conservation_violations, conservation_checks, worst_conservation_ulps);
  return o;
}

// 4. Network-lasso regularization path limits.
ProblemGraph lasso_path_instance(double w, std::vector<Vector>& a, Vector& weights) {
  Rng rng(77);
  ProblemGraph g;
  a.clear();
  weights.clear();
  for (std::uint64_t i = 0; i < 20; ++i) {
    a.push_back(rng.vector(3, -10, 10));
    weights.push_back(rng.uniform(0.5, 2.0));
    g.add_node(NodeSpec{NodeId{i}, 3, {atoms::sum_squares(weights.back(), a.back())}, std::nullopt});
  }
  for (std::uint64_t i = 0; i < 20; ++i) g.add_edge(EdgeSpec{NodeId{i}, NodeId{(i + 1) % 20}, {atoms::netlasso(w)}});
  for (std::uint64_t i = 0; i < 10; ++i) g.add_edge(EdgeSpec{NodeId{i}, NodeId{i + 10}, {atoms::netlasso(w)}});
  return g;
}

Outcome regularization_path() {
  std::vector<Vector> a;
  Vector weights;
  SolveOptions opts;
  opts.criteria = {1e-10, 1e-10, 100000};

  const SolveResult free = admm::solve(lasso_path_instance(0.0, a, weights), opts);
  bool exact = free.status == SolveStatus::Converged;
  for (std::uint64_t i = 0; i < 20; ++i) exact = exact && free.x_star.at(NodeId{i}) == a[i];

  double max_norm = 0.0;
  for (const Vector& ai : a) max_norm = std::max(max_norm, norm(ai));
  const SolveResult fused = admm::solve(lasso_path_instance(1e4 * max_norm, a, weights), opts);
  Vector mean(3, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    total += weights[i];
    for (std::size_t k = 0; k < 3; ++k) mean[k] += weights[i] * a[i][k];
  }
  for (double& m : mean) m /= total;
  double spread = 0.0, off_mean = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Vector& xi = fused.x_star.at(NodeId{i});
    Vector diff(3);
    for (std::size_t k = 0; k < 3; ++k) diff[k] = xi[k] - mean[k];
    off_mean = std::max(off_mean, norm(diff));
    for (std::uint64_t j = 0; j < i; ++j) {
      const Vector& xj = fused.x_star.at(NodeId{j});
      for (std::size_t k = 0; k < 3; ++k) diff[k] = xi[k] - xj[k];
      spread = std::max(spread, norm(diff));
    }
  }
  Outcome o;
  o.pass = exact && spread <= 1e-4 && off_mean <= 1e-3;
  o.detail = fmt("w=0 exact=%d; w=%.3g pairwise spread=%.3e distance to weighted mean=%.3e status=%s iters=%zu", exact,
                 1e4 * max_norm, spread, off_mean, std::string(to_string(fused.status)).c_str(), fused.iters);
  return o;
}

// 5. Desk-scale scaling run.
Outcome scaling() {
  auto best_of = [](std::size_t nodes, int repeats) {
    BenchmarkReport best;
    best.solve_seconds = kInf;
    for (int k = 0; k < repeats; ++k) {
      BenchmarkConfig config;
      config.nodes = nodes;
      config.dim = 10;
      const BenchmarkReport r = run_benchmark(config);
      if (r.solve_seconds < best.solve_seconds) best = r;
    }
    return best;
  };
  const BenchmarkReport small = best_of(1000, 5);
  const BenchmarkReport large = best_of(10000, 3);
  const double ratio = large.solve_seconds / small.solve_seconds;
  Outcome o;
  o.pass = small.status == SolveStatus::Converged && large.status == SolveStatus::Converged && ratio >= 4.0 &&
           ratio <= 40.0;
  o.detail = fmt("(1000,10): %s %zu iters %.4fs; (10000,10): %s %zu iters %.4fs; ratio=%.2f",
                 std::string(to_string(small.status)).c_str(), small.iterations, small.solve_seconds,
                 std::string(to_string(large.status)).c_str(), large.iterations, large.solve_seconds, ratio);
  return o;
}

// 6. Rho rescale invariance.
Outcome rho_rescale() {
  const ProblemGraph g = make_benchmark_problem({200, 5, 3});
  SolverState s = admm::initialize(g, 1.0);
  for (int k = 0; k < 10; ++k) {
    admm::x_update(s);
    admm::z_update(s);
    admm::u_update(s);
  }
  const std::vector<RhoPolicy> policies{
      ResidualBalance{}, ResidualBalance{10, 3.3, 1.7},
      RhoCallback([](std::size_t, double rho, double, double) { return rho / 3; }),
      RhoCallback([](std::size_t, double rho, double, double) { return rho * 7.1; }),
      RhoCallback([](std::size_t, double rho, double pn, double dn) { return rho * std::sqrt(pn / dn); })};
  bool unchanged = true;
  double worst = 0.0;
  std::size_t applications = 0;
  for (const RhoPolicy& policy : policies) {
    for (const auto& [pn, dn] : {std::pair{100.0, 1.0}, std::pair{1.0, 100.0}, std::pair{3.0, 1.0}}) {
      const Vector x = s.x, z = s.z, u = s.u;
      const double rho = s.rho;
      admm::update_rho(policy, s, pn, dn);
      unchanged = unchanged && s.x == x && s.z == z;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double y = rho * u[i];
        if (y != 0.0) worst = std::max(worst, std::abs(s.rho * s.u[i] - y) / std::abs(y));
      }
      ++applications;
    }
  }
  const double eps = std::numeric_limits<double>::epsilon();
  return {unchanged && worst <= eps,
          fmt("%zu rescales, x and z unchanged=%d, worst relative change in rho*u=%.3e (bound %.3e)", applications,
              unchanged, worst, eps)};
}

// 7. Determinism across worker counts.
Outcome determinism() {
  const ProblemGraph g = make_benchmark_problem({1000, 10, 5});
  bool identical = true;
  double worst = 0.0;
  std::size_t iters = 0;
  for (const RhoPolicy& policy : {RhoPolicy(FixedRho{}), RhoPolicy(ResidualBalance{})}) {
    SolveOptions opts;
    opts.policy = policy;
    opts.threads = 1;
    const SolveResult a = admm::solve(g, opts);
    opts.threads = 8;
    const SolveResult b = admm::solve(g, opts);
    identical = identical && a.history == b.history && a.x_star == b.x_star;
    if (a.history.size() != b.history.size()) {
      worst = kInf;
      continue;
    }
    for (std::size_t k = 0; k < a.history.size(); ++k)
      worst = std::max({worst, std::abs(a.history[k].primal_norm - b.history[k].primal_norm),
                        std::abs(a.history[k].dual_norm - b.history[k].dual_norm)});
    iters += a.iters;
  }
  return {identical && worst <= 1e-12,
          fmt("bitwise identical=%d, worst residual difference=%.3e over %zu iterations", identical, worst, iters)};
}

// 8. Parser totality and corpus round trip.
Outcome parser_totality() {
  Rng rng(8);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_ABCXYZ0123456789.+-*/(),;: \t\n\reEx\x01\x7f\xff";
  std::size_t crashes = 0, syntax = 0, typed = 0, accepted = 0, unpositioned = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    std::string src;
    if (trial % 4 == 0) {
      const std::size_t len = rng.index(40);
      for (std::size_t i = 0; i < len; ++i) src += alphabet[rng.index(alphabet.size())];
    } else {
      src = random_node_template(rng);
      const std::size_t edits = 1 + rng.index(5);
      for (std::size_t e = 0; e < edits; ++e) {
        const std::size_t at = rng.index(src.size() + 1);
        switch (rng.index(3)) {
          case 0: src.insert(src.begin() + static_cast<std::ptrdiff_t>(at), alphabet[rng.index(alphabet.size())]); break;
          case 1: if (at < src.size()) src.erase(at, 1); break;
          default: if (at < src.size()) src[at] = alphabet[rng.index(alphabet.size())]; break;
        }
      }
    }
    try {
      if (trial % 2 == 0) parse_node_template(src);
      else parse_edge_template(src);
      ++accepted;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SyntaxError) {
        ++syntax;
        if (!e.position() || *e.position() > src.size()) ++unpositioned;
      } else {
        ++typed;
      }
    } catch (...) {
      ++crashes;
    }
  }

  std::size_t corpus_total = 0, corpus_ok = 0;
  auto round_trip = [&](const char* file, auto parse) {
    std::ifstream in(std::string(NETCVX_TEST_CORPUS_DIR) + "/" + file);
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      ++corpus_total;
      try {
        const auto t = parse(line);
        if (parse(render(t)) == t) ++corpus_ok;
      } catch (...) {
      }
    }
  };
  round_trip("node_templates.txt", [](std::string_view s) { return parse_node_template(s); });
  round_trip("edge_templates.txt", [](std::string_view s) { return parse_edge_template(s); });
  for (int k = 0; k < 1000; ++k) {
    ++corpus_total;
    const ObjectiveTemplate t = parse_node_template(random_node_template(rng));
    if (parse_node_template(render(t)) == t) ++corpus_ok;
  }

  return {crashes == 0 && unpositioned == 0 && corpus_total > 1000 && corpus_ok == corpus_total,
          fmt("100000 fuzzed inputs: crashes=%zu syntax errors=%zu (unpositioned %zu) other typed errors=%zu "
              "accepted=%zu; round trip %zu/%zu",
              crashes, syntax, unpositioned, typed, accepted, corpus_ok, corpus_total)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 two-node worked example", two_node_example},
      {"2 quadratic equivalence", quadratic_equivalence},
      {"3 prox correctness", prox_correctness},
      {"4 regularization path limits", regularization_path},
      {"5 desk-scale scaling", scaling},
      {"6 rho rescale invariance", rho_rescale},
      {"7 determinism across thread counts", determinism},
      {"8 parser totality", parser_totality},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
