#pragma once

// File formats:
//
//   edge list      "j k" per line, '#' starts a comment, blank lines ignored
//   node data      CSV; header "id,<col>,..."; vector columns are spelled
//                  name[0], name[1], ... and must be contiguous from 0
//   edge data      CSV; header "src,dst,<col>,..."
//   solution       CSV "id,x[0],x[1],..." at 17 significant digits, one row
//                  per node in ascending id order
//   summary        JSON object with the termination record

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netcvx/admm.hpp"
#include "netcvx/bulk.hpp"
#include "netcvx/graph.hpp"

namespace netcvx {

std::vector<EdgeKey> parse_edge_list(std::istream& in, std::string_view source = "<edge list>");
NodeDataTable parse_node_data(std::istream& in, std::string_view source = "<node data>");
EdgeDataTable parse_edge_data(std::istream& in, std::string_view source = "<edge data>");

std::vector<EdgeKey> read_edge_list(const std::filesystem::path& path);
NodeDataTable read_node_data(const std::filesystem::path& path);
EdgeDataTable read_edge_data(const std::filesystem::path& path);

/// Builds the full problem. Nodes that appear only in the edge list get an
/// empty (zero) objective and take their dimension from a neighbor with data.
ProblemGraph load_problem(const std::filesystem::path& graph_path, const std::filesystem::path& node_data_path,
                          std::string_view node_template, std::string_view edge_template,
                          const std::optional<std::filesystem::path>& edge_data_path = std::nullopt);

void write_solution(std::ostream& out, const std::map<NodeId, Vector>& x);
std::map<NodeId, Vector> parse_solution(std::istream& in, std::string_view source = "<solution>");

void write_summary(std::ostream& out, const SolveResult& result);

// ---------------------------------------------------------------------------
// Benchmark harness: Huber nodes with network-lasso edges on a random
// 3-regular graph.

/// Pairing-model sampling, restarted until the result is simple. Throws
/// OddNodeCount for odd n and InvalidParameter for n < 4.
std::vector<EdgeKey> random_3_regular(std::size_t nodes, std::uint64_t seed);

struct BenchmarkConfig {
  std::size_t nodes = 1000;
  std::size_t dim = 10;
  std::uint64_t seed = 1;
  int threads = 0;
  double edge_weight = 0.1;
  double huber_threshold = 1.0;
  StoppingCriteria criteria;
};

ProblemGraph make_benchmark_problem(const BenchmarkConfig& config);

struct BenchmarkReport {
  std::size_t nodes = 0;
  std::size_t dim = 0;
  std::size_t unknowns = 0;
  std::size_t edges = 0;
  int threads = 0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::MaxIters;
  double objective = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& config);
std::string format_report(const BenchmarkReport& report);

}  // namespace netcvx
