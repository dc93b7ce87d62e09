#include "netcvx/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "netcvx/error.hpp"
#include "netcvx/objective_dsl.hpp"

namespace netcvx {

namespace {

[[noreturn]] void parse_error(std::string_view source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) + ": " + msg, line);
}

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_id(std::string_view text, std::string_view source, std::size_t line) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size())
    parse_error(source, line, "invalid node id '" + std::string(text) + "'");
  return v;
}

double parse_value(std::string_view text, std::string_view source, std::size_t line) {
  double v = 0.0;
  std::string_view t = text;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size() || std::isnan(v))
    parse_error(source, line, "invalid number '" + std::string(text) + "'");
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return in;
}

// Maps CSV columns (after the key columns) onto named scalar/vector fields.
struct ColumnPlan {
  std::vector<std::string> names;
  // For each CSV column: (field index, component index).
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  std::vector<std::size_t> lengths;
};

ColumnPlan plan_columns(const std::vector<std::string_view>& header, std::size_t skip, std::string_view source) {
  ColumnPlan plan;
  std::map<std::string, std::size_t> index;
  std::vector<bool> is_vector;
  std::vector<std::set<std::size_t>> seen;
  for (std::size_t c = skip; c < header.size(); ++c) {
    std::string_view h = header[c];
    std::string name(h);
    std::size_t component = 0;
    bool vec = false;
    const std::size_t open = h.find('[');
    if (open != std::string_view::npos) {
      if (h.back() != ']') parse_error(source, 1, "malformed column '" + name + "'");
      name = std::string(trim(h.substr(0, open)));
      component = parse_id(h.substr(open + 1, h.size() - open - 2), source, 1);
      vec = true;
    }
    if (name.empty()) parse_error(source, 1, "empty column name");
    auto [it, inserted] = index.emplace(name, plan.names.size());
    if (inserted) {
      plan.names.push_back(name);
      is_vector.push_back(vec);
      seen.emplace_back();
    } else if (is_vector[it->second] != vec || !vec) {
      parse_error(source, 1, "column '" + name + "' declared twice");
    }
    if (!seen[it->second].insert(component).second)
      parse_error(source, 1, "column '" + std::string(h) + "' declared twice");
    plan.slots.emplace_back(it->second, component);
  }
  for (std::size_t f = 0; f < plan.names.size(); ++f) {
    const std::size_t n = seen[f].size();
    if (*seen[f].rbegin() != n - 1)
      parse_error(source, 1, "vector column '" + plan.names[f] + "' is not contiguous from index 0");
    plan.lengths.push_back(n);
  }
  return plan;
}

DataRow fill_row(const ColumnPlan& plan, const std::vector<std::string_view>& cells, std::size_t skip,
                 std::string_view source, std::size_t line) {
  DataRow row;
  for (std::size_t f = 0; f < plan.names.size(); ++f) row.emplace(plan.names[f], Vector(plan.lengths[f], 0.0));
  for (std::size_t c = 0; c < plan.slots.size(); ++c) {
    const auto [field, component] = plan.slots[c];
    row.find(plan.names[field])->second[component] = parse_value(cells[skip + c], source, line);
  }
  return row;
}

template <typename OnRow>
std::vector<std::string> read_table(std::istream& in, std::string_view source,
                                    std::initializer_list<std::string_view> keys, OnRow&& on_row) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<ColumnPlan> plan;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> cells = split_csv(line);
    if (!plan) {
      if (lineno != 1) parse_error(source, lineno, "header must be on the first line");
      std::size_t k = 0;
      for (std::string_view key : keys) {
        if (cells.size() <= k || cells[k] != key)
          parse_error(source, lineno, "column " + std::to_string(k + 1) + " must be '" + std::string(key) + "'");
        ++k;
      }
      plan = plan_columns(cells, keys.size(), source);
      width = cells.size();
      continue;
    }
    if (cells.size() != width)
      parse_error(source, lineno, "expected " + std::to_string(width) + " fields, found " + std::to_string(cells.size()));
    on_row(cells, fill_row(*plan, cells, keys.size(), source, lineno), lineno);
  }
  if (!plan) parse_error(source, lineno, "missing header");
  return plan->names;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<EdgeKey> parse_edge_list(std::istream& in, std::string_view source) {
  std::vector<EdgeKey> edges;
  std::set<EdgeKey> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const std::size_t hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    std::istringstream fields{std::string(body)};
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) parse_error(source, lineno, "expected 'j k', found " + std::to_string(tokens.size()) + " fields");
    const NodeId j{parse_id(tokens[0], source, lineno)};
    const NodeId k{parse_id(tokens[1], source, lineno)};
    if (j == k)
      throw Error(ErrorCode::SelfLoop, std::string(source) + ":" + std::to_string(lineno) + ": self-loop", lineno);
    const EdgeKey key = make_edge_key(j, k);
    if (!seen.insert(key).second)
      throw Error(ErrorCode::DuplicateEdge, std::string(source) + ":" + std::to_string(lineno) + ": duplicate edge",
                  lineno);
    edges.push_back(key);
  }
  return edges;
}

NodeDataTable parse_node_data(std::istream& in, std::string_view source) {
  NodeDataTable table;
  std::set<NodeId> ids;
  table.columns = read_table(in, source, {"id"}, [&](const auto& cells, DataRow row, std::size_t line) {
    const NodeId id{parse_id(cells[0], source, line)};
    if (!ids.insert(id).second) parse_error(source, line, "duplicate id " + std::to_string(id.value));
    table.rows.push_back({id, std::move(row)});
  });
  return table;
}

EdgeDataTable parse_edge_data(std::istream& in, std::string_view source) {
  EdgeDataTable table;
  table.columns = read_table(in, source, {"src", "dst"}, [&](const auto& cells, DataRow row, std::size_t line) {
    table.rows.push_back({NodeId{parse_id(cells[0], source, line)}, NodeId{parse_id(cells[1], source, line)}, std::move(row)});
  });
  return table;
}

std::vector<EdgeKey> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_edge_list(in, path.string());
}

NodeDataTable read_node_data(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_node_data(in, path.string());
}

EdgeDataTable read_edge_data(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_edge_data(in, path.string());
}

ProblemGraph load_problem(const std::filesystem::path& graph_path, const std::filesystem::path& node_data_path,
                          std::string_view node_template, std::string_view edge_template,
                          const std::optional<std::filesystem::path>& edge_data_path) {
  const ObjectiveTemplate node_t = parse_node_template(node_template);
  const EdgeObjectiveTemplate edge_t = parse_edge_template(edge_template);
  const std::vector<EdgeKey> edges = read_edge_list(graph_path);
  const NodeDataTable data = read_node_data(node_data_path);
  std::optional<EdgeDataTable> edge_data;
  if (edge_data_path) edge_data = read_edge_data(*edge_data_path);

  ProblemGraph g;
  add_node_objectives_bulk(g, node_t, data);

  // Relay nodes: dimension from the nearest node with data, else the first row's.
  std::map<NodeId, std::vector<NodeId>> adjacency;
  for (const auto& [j, k] : edges) {
    adjacency[j].push_back(k);
    adjacency[k].push_back(j);
  }
  std::map<NodeId, std::size_t> dims;
  std::deque<NodeId> frontier;
  for (const auto& [id, spec] : g.nodes()) {
    dims[id] = spec.dim;
    frontier.push_back(id);
  }
  while (!frontier.empty()) {
    const NodeId id = frontier.front();
    frontier.pop_front();
    for (NodeId nb : adjacency[id])
      if (dims.emplace(nb, dims[id]).second) frontier.push_back(nb);
  }
  const std::size_t fallback = data.rows.empty() ? 1 : g.node(data.rows.front().id).dim;
  for (const auto& [id, nbs] : adjacency)
    if (!g.has_node(id)) {
      auto it = dims.find(id);
      g.add_node(NodeSpec{id, it == dims.end() ? fallback : it->second, {}, std::nullopt});
    }

  for (const auto& [j, k] : edges) g.add_edge(EdgeSpec{j, k, {}});
  add_edge_objectives_bulk(g, edge_t, edge_data);
  return g;
}

void write_solution(std::ostream& out, const std::map<NodeId, Vector>& x) {
  std::size_t width = 0;
  for (const auto& [id, v] : x) width = std::max(width, v.size());
  out << "id";
  for (std::size_t i = 0; i < width; ++i) out << ",x[" << i << "]";
  out << '\n';
  for (const auto& [id, v] : x) {
    out << id.value;
    for (double value : v) out << ',' << format_double(value);
    out << '\n';
  }
}

std::map<NodeId, Vector> parse_solution(std::istream& in, std::string_view source) {
  std::map<NodeId, Vector> x;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (lineno == 1) {
      if (cells.empty() || cells[0] != "id") parse_error(source, lineno, "solution header must start with 'id'");
      continue;
    }
    const NodeId id{parse_id(cells[0], source, lineno)};
    Vector v;
    for (std::size_t c = 1; c < cells.size(); ++c) v.push_back(parse_value(cells[c], source, lineno));
    if (!x.emplace(id, std::move(v)).second) parse_error(source, lineno, "duplicate id");
  }
  return x;
}

void write_summary(std::ostream& out, const SolveResult& result) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(result.status));
  j["iters"] = result.iters;
  j["objective"] = result.objective;
  if (!result.history.empty()) {
    const IterationRecord& last = result.history.back();
    j["primal_norm"] = last.primal_norm;
    j["dual_norm"] = last.dual_norm;
    j["eps_pri"] = last.eps_pri;
    j["eps_dual"] = last.eps_dual;
  } else {
    j["primal_norm"] = 0.0;
    j["dual_norm"] = 0.0;
    j["eps_pri"] = 0.0;
    j["eps_dual"] = 0.0;
  }
  j["rho_initial"] = result.rho_initial;
  j["rho_final"] = result.rho_final;
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<EdgeKey> random_3_regular(std::size_t nodes, std::uint64_t seed) {
  if (nodes % 2 != 0) throw Error(ErrorCode::OddNodeCount, "a 3-regular graph needs an even node count");
  if (nodes < 4) throw Error(ErrorCode::InvalidParameter, "a 3-regular graph needs at least 4 nodes");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> stubs(3 * nodes);
  for (std::size_t i = 0; i < stubs.size(); ++i) stubs[i] = i / 3;
  while (true) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<EdgeKey> seen;
    bool simple = true;
    for (std::size_t i = 0; i < stubs.size() && simple; i += 2) {
      if (stubs[i] == stubs[i + 1]) simple = false;
      else simple = seen.insert(make_edge_key(NodeId{stubs[i]}, NodeId{stubs[i + 1]})).second;
    }
    if (simple) return {seen.begin(), seen.end()};
  }
}

ProblemGraph make_benchmark_problem(const BenchmarkConfig& config) {
  if (config.dim == 0) throw Error(ErrorCode::InvalidParameter, "dimension must be positive");
  const std::vector<EdgeKey> edges = random_3_regular(config.nodes, config.seed);
  // Data uses its own stream so the graph and the data can be regenerated independently.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uniform(-10.0, 10.0);
  ProblemGraph g;
  for (std::size_t i = 0; i < config.nodes; ++i) {
    Vector a(config.dim);
    for (double& v : a) v = uniform(rng);
    g.add_node(NodeSpec{NodeId{i}, config.dim, {atoms::huber(1.0, std::move(a), config.huber_threshold)}, std::nullopt});
  }
  for (const auto& [j, k] : edges) g.add_edge(EdgeSpec{j, k, {atoms::netlasso(config.edge_weight)}});
  return g;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const ProblemGraph g = make_benchmark_problem(config);
  const auto t1 = clock::now();
  SolveOptions options;
  options.criteria = config.criteria;
  options.threads = config.threads;
  const SolveResult result = admm::solve(g, options);
  const auto t2 = clock::now();

  BenchmarkReport r;
  r.nodes = config.nodes;
  r.dim = config.dim;
  r.unknowns = config.nodes * config.dim;
  r.edges = g.edge_count();
  r.threads = resolve_thread_count(config.threads);
  r.iterations = result.iters;
  r.status = result.status;
  r.objective = result.objective;
  r.setup_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

std::string format_report(const BenchmarkReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "nodes=%zu dim=%zu unknowns=%zu edges=%zu threads=%d iters=%zu status=%s objective=%.10g "
                "setup_s=%.4f solve_s=%.4f",
                r.nodes, r.dim, r.unknowns, r.edges, r.threads, r.iterations, std::string(to_string(r.status)).c_str(),
                r.objective, r.setup_seconds, r.solve_seconds);
  return buf;
}

}  // namespace netcvx
