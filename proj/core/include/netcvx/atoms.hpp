#pragma once

// Convex objective atoms for nodes and edges, with closed-form proximal maps.
//
// Node atoms act on a single node variable x. Edge atoms are functions of the
// difference of the two endpoint variables. Every operation here is a pure
// function of its arguments.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace netcvx {

using Vector = std::vector<double>;

enum class AtomKind { SumSquares, Norm1, Norm2, Huber, Linear, Zero };
enum class EdgeAtomKind { Zero, SqDiff, NetLasso, AbsDiff };

std::string_view to_string(AtomKind kind);
std::string_view to_string(EdgeAtomKind kind);

/// One node objective term: weight * phi(x - shift), or weight * slope^T x for
/// Linear. Parameter vectors have length dim or 1 (broadcast).
struct AtomSpec {
  AtomKind kind = AtomKind::Zero;
  double weight = 1.0;
  Vector shift;            // SumSquares, Norm1, Norm2, Huber; empty means 0
  Vector slope;            // Linear
  double huber_threshold = 1.0;

  bool operator==(const AtomSpec&) const = default;
};

struct EdgeAtomSpec {
  EdgeAtomKind kind = EdgeAtomKind::Zero;
  double weight = 1.0;

  bool operator==(const EdgeAtomSpec&) const = default;
};

/// Elementwise bounds; -inf / +inf denote an open side.
struct Box {
  Vector lower;
  Vector upper;

  bool operator==(const Box&) const = default;
};

struct ProxQuery {
  std::span<const double> center;
  double sigma = 1.0;
};

namespace atoms {

AtomSpec sum_squares(double weight, Vector shift);
AtomSpec norm1(double weight, Vector shift);
AtomSpec norm2(double weight, Vector shift);
AtomSpec huber(double weight, Vector shift, double threshold = 1.0);
AtomSpec linear(double weight, Vector slope);
AtomSpec zero();
/// square(x): sum_squares with unit weight and zero shift.
AtomSpec square();

EdgeAtomSpec sq_diff(double weight);
EdgeAtomSpec netlasso(double weight);
EdgeAtomSpec abs_diff(double weight);
EdgeAtomSpec edge_zero();

}  // namespace atoms

bool is_separable(AtomKind kind);

/// Checks weight/threshold ranges and that parameter vectors have length dim or 1.
void validate_atom(const AtomSpec& atom, std::size_t dim);
void validate_edge_atom(const EdgeAtomSpec& atom);

double huber_penalty(double t, double threshold);

double eval_node_atom(const AtomSpec& atom, std::span<const double> x);
double eval_edge_atom(const EdgeAtomSpec& atom, std::span<const double> xa, std::span<const double> xb);

/// A node objective reduced to at most one nonlinear atom plus a folded linear
/// term and an optional box. This is what the solver evaluates every iteration.
class NodeOperator {
 public:
  /// Throws UnsupportedComposite for two or more nonlinear atoms, InvalidBox
  /// for boxes with non-separable atoms or crossed bounds.
  NodeOperator(std::span<const AtomSpec> objective, const std::optional<Box>& box, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }

  /// argmin_t f(t) + sigma/2 ||t - v||^2, clamped into the box.
  void prox(std::span<const double> center, double sigma, std::span<double> out) const;

  /// Exact unpenalized minimizer. Throws UnboundedObjective.
  void argmin(std::span<double> out) const;

 private:
  double shift(std::size_t i) const { return shift_.size() == 1 ? shift_[0] : shift_[i]; }
  double clamp(std::size_t i, double t) const;

  std::size_t dim_;
  AtomKind kind_ = AtomKind::Zero;
  double weight_ = 0.0;
  double threshold_ = 1.0;
  Vector shift_;
  Vector linear_;  // sum of weight * slope over Linear terms, length dim
  bool has_linear_ = false;
  std::optional<Box> box_;
};

/// A list of edge atoms reduced to a single kind with accumulated weight.
struct EdgeOperator {
  EdgeAtomKind kind = EdgeAtomKind::Zero;
  double weight = 0.0;

  /// Same-kind atoms add; mixed nonzero kinds throw UnsupportedComposite.
  static EdgeOperator reduce(std::span<const EdgeAtomSpec> objective);

  bool couples() const noexcept { return kind != EdgeAtomKind::Zero && weight > 0.0; }

  /// argmin over (za, zb) of g(za - zb) + rho/2 ||za - ca||^2 + rho/2 ||zb - cb||^2.
  void prox(std::span<const double> ca, std::span<const double> cb, double rho, std::span<double> za,
            std::span<double> zb) const;
};

Vector prox_node(std::span<const AtomSpec> objective, const std::optional<Box>& box, const ProxQuery& query);
Vector argmin_node(std::span<const AtomSpec> objective, const std::optional<Box>& box, std::size_t dim);
std::pair<Vector, Vector> edge_prox(std::span<const EdgeAtomSpec> objective, std::span<const double> ca,
                                    std::span<const double> cb, double rho);

}  // namespace netcvx
