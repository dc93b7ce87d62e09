#include "netcvx/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "netcvx/error.hpp"

namespace netcvx {

namespace {

double at(const Vector& v, std::size_t i) {
  if (v.empty()) return 0.0;
  return v.size() == 1 ? v[0] : v[i];
}

double soft_threshold(double y, double t) {
  if (y > t) return y - t;
  if (y < -t) return y + t;
  return 0.0;
}

double sign(double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); }

void check_length(const Vector& v, std::size_t dim, const char* name) {
  if (!v.empty() && v.size() != 1 && v.size() != dim)
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has length " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(dim) + " or 1");
}

void check_finite_nonnegative(double w, const char* name) {
  if (!(w >= 0.0) || !std::isfinite(w))
    throw Error(ErrorCode::NegativeWeight, std::string(name) + " must be finite and nonnegative");
}

}  // namespace

std::string_view to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::SumSquares: return "sum_squares";
    case AtomKind::Norm1: return "norm1";
    case AtomKind::Norm2: return "norm2";
    case AtomKind::Huber: return "huber";
    case AtomKind::Linear: return "linear";
    case AtomKind::Zero: return "zero";
  }
  return "?";
}

std::string_view to_string(EdgeAtomKind kind) {
  switch (kind) {
    case EdgeAtomKind::Zero: return "zero";
    case EdgeAtomKind::SqDiff: return "sq_diff";
    case EdgeAtomKind::NetLasso: return "netlasso";
    case EdgeAtomKind::AbsDiff: return "abs_diff";
  }
  return "?";
}

namespace atoms {

AtomSpec sum_squares(double weight, Vector shift) { return {AtomKind::SumSquares, weight, std::move(shift), {}, 1.0}; }
AtomSpec norm1(double weight, Vector shift) { return {AtomKind::Norm1, weight, std::move(shift), {}, 1.0}; }
AtomSpec norm2(double weight, Vector shift) { return {AtomKind::Norm2, weight, std::move(shift), {}, 1.0}; }
AtomSpec huber(double weight, Vector shift, double threshold) {
  return {AtomKind::Huber, weight, std::move(shift), {}, threshold};
}
AtomSpec linear(double weight, Vector slope) { return {AtomKind::Linear, weight, {}, std::move(slope), 1.0}; }
AtomSpec zero() { return {AtomKind::Zero, 0.0, {}, {}, 1.0}; }
AtomSpec square() { return sum_squares(1.0, {0.0}); }

EdgeAtomSpec sq_diff(double weight) { return {EdgeAtomKind::SqDiff, weight}; }
EdgeAtomSpec netlasso(double weight) { return {EdgeAtomKind::NetLasso, weight}; }
EdgeAtomSpec abs_diff(double weight) { return {EdgeAtomKind::AbsDiff, weight}; }
EdgeAtomSpec edge_zero() { return {EdgeAtomKind::Zero, 0.0}; }

}  // namespace atoms

bool is_separable(AtomKind kind) { return kind != AtomKind::Norm2; }

void validate_atom(const AtomSpec& atom, std::size_t dim) {
  check_finite_nonnegative(atom.weight, "atom weight");
  if (atom.kind == AtomKind::Huber && !(atom.huber_threshold > 0.0 && std::isfinite(atom.huber_threshold)))
    throw Error(ErrorCode::InvalidParameter, "huber threshold must be positive");
  check_length(atom.shift, dim, "shift");
  check_length(atom.slope, dim, "slope");
}

void validate_edge_atom(const EdgeAtomSpec& atom) { check_finite_nonnegative(atom.weight, "edge weight"); }

double huber_penalty(double t, double threshold) {
  const double a = std::abs(t);
  return a <= threshold ? t * t : threshold * (2.0 * a - threshold);
}

double eval_node_atom(const AtomSpec& atom, std::span<const double> x) {
  validate_atom(atom, x.size());
  double acc = 0.0;
  switch (atom.kind) {
    case AtomKind::Zero: return 0.0;
    case AtomKind::Linear:
      for (std::size_t i = 0; i < x.size(); ++i) acc += at(atom.slope, i) * x[i];
      return atom.weight * acc;
    case AtomKind::SumSquares:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - at(atom.shift, i);
        acc += d * d;
      }
      return atom.weight * acc;
    case AtomKind::Norm1:
      for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - at(atom.shift, i));
      return atom.weight * acc;
    case AtomKind::Norm2:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - at(atom.shift, i);
        acc += d * d;
      }
      return atom.weight * std::sqrt(acc);
    case AtomKind::Huber:
      for (std::size_t i = 0; i < x.size(); ++i) acc += huber_penalty(x[i] - at(atom.shift, i), atom.huber_threshold);
      return atom.weight * acc;
  }
  return 0.0;
}

double eval_edge_atom(const EdgeAtomSpec& atom, std::span<const double> xa, std::span<const double> xb) {
  validate_edge_atom(atom);
  if (atom.kind == EdgeAtomKind::Zero) return 0.0;
  if (xa.size() != xb.size()) throw Error(ErrorCode::DimensionMismatch, "edge endpoints differ in dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const double d = xa[i] - xb[i];
    acc += atom.kind == EdgeAtomKind::AbsDiff ? std::abs(d) : d * d;
  }
  if (atom.kind == EdgeAtomKind::NetLasso) acc = std::sqrt(acc);
  return atom.weight * acc;
}

// ---------------------------------------------------------------------------

NodeOperator::NodeOperator(std::span<const AtomSpec> objective, const std::optional<Box>& box, std::size_t dim)
    : dim_(dim), linear_(dim, 0.0) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "node dimension must be positive");
  bool have_main = false;
  for (const AtomSpec& atom : objective) {
    validate_atom(atom, dim);
    if (atom.kind == AtomKind::Zero || atom.weight == 0.0) continue;
    if (atom.kind == AtomKind::Linear) {
      for (std::size_t i = 0; i < dim; ++i) linear_[i] += atom.weight * at(atom.slope, i);
      has_linear_ = true;
      continue;
    }
    if (have_main)
      throw Error(ErrorCode::UnsupportedComposite, "at most one nonlinear atom per node objective is supported");
    have_main = true;
    kind_ = atom.kind;
    weight_ = atom.weight;
    threshold_ = atom.huber_threshold;
    shift_ = atom.shift.empty() ? Vector{0.0} : atom.shift;
  }
  if (!have_main) shift_ = {0.0};

  if (box) {
    for (const AtomSpec& atom : objective)
      if (!is_separable(atom.kind)) throw Error(ErrorCode::InvalidBox, "box constraints require separable atoms");
    const auto expand = [dim](const Vector& v, const char* side) {
      if (v.size() == dim) return v;
      if (v.size() == 1) return Vector(dim, v[0]);
      throw Error(ErrorCode::InvalidBox, std::string("box ") + side + " bound has wrong length");
    };
    Box b{expand(box->lower, "lower"), expand(box->upper, "upper")};
    for (std::size_t i = 0; i < dim; ++i)
      if (std::isnan(b.lower[i]) || std::isnan(b.upper[i]) || b.lower[i] > b.upper[i])
        throw Error(ErrorCode::InvalidBox, "box lower bound exceeds upper bound at coordinate " + std::to_string(i));
    box_ = std::move(b);
  }
}

double NodeOperator::clamp(std::size_t i, double t) const {
  if (!box_) return t;
  return std::clamp(t, box_->lower[i], box_->upper[i]);
}

void NodeOperator::prox(std::span<const double> center, double sigma, std::span<double> out) const {
  if (center.size() != dim_ || out.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "prox center has wrong dimension");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidParameter, "prox sigma must be positive");

  // Linear terms shift the prox center: v <- v - g / sigma.
  for (std::size_t i = 0; i < dim_; ++i) out[i] = has_linear_ ? center[i] - linear_[i] / sigma : center[i];

  switch (kind_) {
    case AtomKind::Zero:
    case AtomKind::Linear:
      break;
    case AtomKind::SumSquares:
      for (std::size_t i = 0; i < dim_; ++i) out[i] = (sigma * out[i] + 2.0 * weight_ * shift(i)) / (sigma + 2.0 * weight_);
      break;
    case AtomKind::Norm1: {
      const double t = weight_ / sigma;
      for (std::size_t i = 0; i < dim_; ++i) out[i] = shift(i) + soft_threshold(out[i] - shift(i), t);
      break;
    }
    case AtomKind::Norm2: {
      double norm = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double d = out[i] - shift(i);
        norm += d * d;
      }
      norm = std::sqrt(norm);
      const double scale = norm > 0.0 ? std::max(1.0 - (weight_ / sigma) / norm, 0.0) : 0.0;
      for (std::size_t i = 0; i < dim_; ++i) out[i] = shift(i) + scale * (out[i] - shift(i));
      break;
    }
    case AtomKind::Huber: {
      const double knee = threshold_ * (sigma + 2.0 * weight_) / sigma;
      const double step = 2.0 * weight_ * threshold_ / sigma;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double d = out[i] - shift(i);
        const double t = std::abs(d) <= knee ? sigma * d / (sigma + 2.0 * weight_) : d - sign(d) * step;
        out[i] = shift(i) + t;
      }
      break;
    }
  }
  if (box_)
    for (std::size_t i = 0; i < dim_; ++i) out[i] = clamp(i, out[i]);
}

void NodeOperator::argmin(std::span<double> out) const {
  if (out.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "argmin output has wrong dimension");
  const auto unbounded = [] {
    throw Error(ErrorCode::UnboundedObjective, "objective is unbounded below on an uncoupled node");
  };
  // Moving along a descending direction until a finite bound stops it.
  const auto ray = [&](std::size_t i, double g) {
    const double bound = g > 0.0 ? (box_ ? box_->lower[i] : -std::numeric_limits<double>::infinity())
                                 : (box_ ? box_->upper[i] : std::numeric_limits<double>::infinity());
    if (!std::isfinite(bound)) unbounded();
    return bound;
  };

  if (kind_ == AtomKind::Norm2) {
    double gnorm = 0.0;
    for (double g : linear_) gnorm += g * g;
    if (std::sqrt(gnorm) > weight_) unbounded();
    for (std::size_t i = 0; i < dim_; ++i) out[i] = shift(i);
    return;
  }

  for (std::size_t i = 0; i < dim_; ++i) {
    const double g = linear_[i];
    double t = 0.0;
    switch (kind_) {
      case AtomKind::Zero:
      case AtomKind::Linear:
        t = g == 0.0 ? clamp(i, 0.0) : ray(i, g);
        break;
      case AtomKind::SumSquares:
        t = clamp(i, shift(i) - g / (2.0 * weight_));
        break;
      case AtomKind::Norm1:
        t = std::abs(g) <= weight_ ? clamp(i, shift(i)) : ray(i, g);
        break;
      case AtomKind::Huber:
        t = std::abs(g) <= 2.0 * weight_ * threshold_ ? clamp(i, shift(i) - g / (2.0 * weight_)) : ray(i, g);
        break;
      case AtomKind::Norm2:
        break;
    }
    out[i] = t;
  }
}

// ---------------------------------------------------------------------------

EdgeOperator EdgeOperator::reduce(std::span<const EdgeAtomSpec> objective) {
  EdgeOperator op;
  for (const EdgeAtomSpec& atom : objective) {
    validate_edge_atom(atom);
    if (atom.kind == EdgeAtomKind::Zero || atom.weight == 0.0) continue;
    if (op.kind != EdgeAtomKind::Zero && op.kind != atom.kind)
      throw Error(ErrorCode::UnsupportedComposite, "edge objective mixes " + std::string(to_string(op.kind)) +
                                                       " and " + std::string(to_string(atom.kind)));
    op.kind = atom.kind;
    op.weight += atom.weight;
  }
  return op;
}

void EdgeOperator::prox(std::span<const double> ca, std::span<const double> cb, double rho, std::span<double> za,
                        std::span<double> zb) const {
  if (za.size() != ca.size() || zb.size() != cb.size())
    throw Error(ErrorCode::DimensionMismatch, "edge prox output has wrong dimension");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidRho, "rho must be positive");
  if (!couples()) {
    if (za.data() != ca.data()) std::copy(ca.begin(), ca.end(), za.begin());
    if (zb.data() != cb.data()) std::copy(cb.begin(), cb.end(), zb.begin());
    return;
  }
  if (ca.size() != cb.size()) throw Error(ErrorCode::DimensionMismatch, "edge endpoints differ in dimension");
  const std::size_t n = ca.size();

  // delta = za - zb is the only quantity the atom acts on; the mean is fixed.
  double shrink = 1.0;
  if (kind == EdgeAtomKind::SqDiff) {
    shrink = rho / (rho + 4.0 * weight);
  } else if (kind == EdgeAtomKind::NetLasso) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = ca[i] - cb[i];
      norm += d * d;
    }
    norm = std::sqrt(norm);
    shrink = norm > 0.0 ? std::max(1.0 - (2.0 * weight / rho) / norm, 0.0) : 0.0;
  }
  const double t = 2.0 * weight / rho;
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = ca[i] + cb[i];
    const double m = sum / 2.0;
    const double d = ca[i] - cb[i];
    const double delta = kind == EdgeAtomKind::AbsDiff ? soft_threshold(d, t) : shrink * d;
    const double a = m + delta / 2.0;
    const double b = m - delta / 2.0;
    // Round the larger-magnitude copy and complement the other against the
    // sum, so za + zb == ca + cb holds in floating point.
    if (std::abs(a) > std::abs(b) || (std::abs(a) == std::abs(b) && a >= b)) {
      za[i] = a;
      zb[i] = sum - a;
    } else {
      za[i] = sum - b;
      zb[i] = b;
    }
  }
}

Vector prox_node(std::span<const AtomSpec> objective, const std::optional<Box>& box, const ProxQuery& query) {
  NodeOperator op(objective, box, query.center.size());
  Vector out(query.center.size());
  op.prox(query.center, query.sigma, out);
  return out;
}

Vector argmin_node(std::span<const AtomSpec> objective, const std::optional<Box>& box, std::size_t dim) {
  NodeOperator op(objective, box, dim);
  Vector out(dim);
  op.argmin(out);
  return out;
}

std::pair<Vector, Vector> edge_prox(std::span<const EdgeAtomSpec> objective, std::span<const double> ca,
                                    std::span<const double> cb, double rho) {
  const EdgeOperator op = EdgeOperator::reduce(objective);
  Vector za(ca.size()), zb(cb.size());
  op.prox(ca, cb, rho, za, zb);
  return {std::move(za), std::move(zb)};
}

}  // namespace netcvx
