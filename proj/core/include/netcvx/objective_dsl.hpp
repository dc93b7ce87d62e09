#pragma once

// Objective templates for bulk loading.
//
// Node template grammar (whitespace-insensitive):
//
//   template := term ('+' term)* [';' box]
//   term     := [(NUMBER | SYM) '*'] atom
//   atom     := 'sum_squares(x - SYM)' | 'norm1(x - SYM)' | 'norm2(x - SYM)'
//             | 'huber(x - SYM, NUMBER)' | 'linear(SYM)' | 'zero()'
//   box      := 'box(' bound ',' bound ')'
//   bound    := ['+' | '-'] (NUMBER | 'inf') | SYM
//
// Edge template grammar:
//
//   template := atom
//   atom     := 'zero()' | ('sq_diff' | 'netlasso' | 'abs_diff') '(' (NUMBER | SYM) ')'
//
// Symbols name columns of a data row. A symbolic coefficient must bind to a
// nonnegative scalar; an atom whose coefficient is zero drops out.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netcvx/atoms.hpp"

namespace netcvx {

/// Literal number or data-column reference.
struct Operand {
  std::variant<double, std::string> value = 1.0;

  static Operand literal(double v) { return Operand{v}; }
  static Operand symbol(std::string name) { return Operand{std::move(name)}; }

  bool is_symbol() const { return std::holds_alternative<std::string>(value); }
  const std::string& symbol_name() const { return std::get<std::string>(value); }
  double literal_value() const { return std::get<double>(value); }

  bool operator==(const Operand&) const = default;
};

struct NodeTerm {
  Operand coefficient;
  AtomKind kind = AtomKind::Zero;
  std::string argument;  // shift column, or slope column for Linear; empty for Zero
  double huber_threshold = 1.0;

  bool operator==(const NodeTerm&) const = default;
};

struct BoxClause {
  Operand lower;
  Operand upper;

  bool operator==(const BoxClause&) const = default;
};

struct ObjectiveTemplate {
  std::vector<NodeTerm> terms;
  std::optional<BoxClause> box;

  bool operator==(const ObjectiveTemplate&) const = default;
};

struct EdgeTerm {
  EdgeAtomKind kind = EdgeAtomKind::Zero;
  Operand weight;

  bool operator==(const EdgeTerm&) const = default;
};

struct EdgeObjectiveTemplate {
  std::vector<EdgeTerm> terms;

  bool operator==(const EdgeObjectiveTemplate&) const = default;
};

/// Named columns of one data record; scalars are length-1 vectors.
using DataRow = std::map<std::string, Vector, std::less<>>;

struct InstantiatedObjective {
  std::vector<AtomSpec> objective;
  std::optional<Box> box;
};

ObjectiveTemplate parse_node_template(std::string_view src);
EdgeObjectiveTemplate parse_edge_template(std::string_view src);

std::string render(const ObjectiveTemplate& t);
std::string render(const EdgeObjectiveTemplate& t);

/// Data symbols in order of first appearance.
std::vector<std::string> symbols(const ObjectiveTemplate& t);
std::vector<std::string> symbols(const EdgeObjectiveTemplate& t);

/// Length of the first symbol bound to a vector (length > 1); 1 if all scalar.
/// Throws MissingColumn.
std::size_t infer_dim(const ObjectiveTemplate& t, const DataRow& row);

/// Terms whose coefficient binds to zero, and zero() terms, are dropped.
InstantiatedObjective instantiate(const ObjectiveTemplate& t, const DataRow& row, std::size_t dim);
std::vector<EdgeAtomSpec> instantiate(const EdgeObjectiveTemplate& t, const DataRow& row);

}  // namespace netcvx
