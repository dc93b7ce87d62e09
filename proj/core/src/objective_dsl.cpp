#include "netcvx/objective_dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "netcvx/error.hpp"

namespace netcvx {

namespace {

enum class Tok { Number, Ident, LParen, RParen, Comma, Plus, Minus, Star, Semicolon, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  std::size_t offset = 0;
  double number = 0.0;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Semicolon: return "';'";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

[[noreturn]] void syntax_error(std::size_t offset, const std::string& msg) {
  throw Error(ErrorCode::SyntaxError, msg + " at offset " + std::to_string(offset), offset);
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
    current_ = Token{Tok::End, {}, pos_, 0.0};
    if (pos_ >= src_.size()) return;

    const std::size_t start = pos_;
    const char c = src_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (p >= src_.size() || !is_digit(src_[p])) syntax_error(p, "malformed exponent");
        while (p < src_.size() && is_digit(src_[p])) ++p;
        pos_ = p;
      }
      const std::string_view text = src_.substr(start, pos_ - start);
      double value = 0.0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value))
        syntax_error(start, "number out of range");
      current_ = Token{Tok::Number, text, start, value};
      return;
    }
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      current_ = Token{Tok::Ident, src_.substr(start, pos_ - start), start, 0.0};
      return;
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case ';': kind = Tok::Semicolon; break;
      default: syntax_error(start, "unexpected character");
    }
    ++pos_;
    current_ = Token{kind, src_.substr(start, 1), start, 0.0};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {
    if (lex_.peek().kind == Tok::End) syntax_error(0, "empty template");
  }

  Token expect(Tok kind) {
    if (lex_.peek().kind != kind)
      syntax_error(lex_.peek().offset, std::string("expected ") + describe(kind) + ", found " + describe(lex_.peek().kind));
    return lex_.take();
  }

  void expect_keyword(std::string_view word) {
    const Token t = expect(Tok::Ident);
    if (t.text != word) syntax_error(t.offset, "expected '" + std::string(word) + "'");
  }

  bool accept(Tok kind) {
    if (lex_.peek().kind != kind) return false;
    lex_.take();
    return true;
  }

  std::string symbol() {
    const Token t = expect(Tok::Ident);
    if (t.text == "x" || t.text == "inf") syntax_error(t.offset, "'" + std::string(t.text) + "' is reserved");
    return std::string(t.text);
  }

  Operand number_or_symbol() {
    if (lex_.peek().kind == Tok::Number) return Operand::literal(lex_.take().number);
    return Operand::symbol(symbol());
  }

  // Arguments of the form `x - SYM`.
  std::string shifted_argument() {
    expect_keyword("x");
    expect(Tok::Minus);
    return symbol();
  }

  Operand bound() {
    double sign = 1.0;
    bool signed_literal = false;
    if (accept(Tok::Minus)) {
      sign = -1.0;
      signed_literal = true;
    } else if (accept(Tok::Plus)) {
      signed_literal = true;
    }
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number) return Operand::literal(sign * lex_.take().number);
    if (t.kind == Tok::Ident && t.text == "inf") {
      lex_.take();
      return Operand::literal(sign * std::numeric_limits<double>::infinity());
    }
    if (signed_literal) syntax_error(t.offset, "expected number or 'inf' after sign");
    return Operand::symbol(symbol());
  }

  NodeTerm node_term() {
    NodeTerm term;
    const Token first = lex_.peek();
    bool have_coefficient = false;
    if (first.kind == Tok::Number) {
      term.coefficient = Operand::literal(lex_.take().number);
      have_coefficient = true;
    } else if (first.kind == Tok::Ident) {
      // SYM '*' atom, or atom directly: decided by the token after the identifier.
      Token ident = lex_.take();
      if (lex_.peek().kind == Tok::Star) {
        if (ident.text == "x" || ident.text == "inf")
          syntax_error(ident.offset, "'" + std::string(ident.text) + "' is reserved");
        term.coefficient = Operand::symbol(std::string(ident.text));
        lex_.take();
        return node_atom(std::move(term), expect(Tok::Ident));
      }
      return node_atom(std::move(term), ident);
    } else {
      syntax_error(first.offset, std::string("expected term, found ") + describe(first.kind));
    }
    if (have_coefficient) expect(Tok::Star);
    return node_atom(std::move(term), expect(Tok::Ident));
  }

  NodeTerm node_atom(NodeTerm term, const Token& name) {
    const std::string_view n = name.text;
    if (n == "sum_squares") term.kind = AtomKind::SumSquares;
    else if (n == "norm1") term.kind = AtomKind::Norm1;
    else if (n == "norm2") term.kind = AtomKind::Norm2;
    else if (n == "huber") term.kind = AtomKind::Huber;
    else if (n == "linear") term.kind = AtomKind::Linear;
    else if (n == "zero") term.kind = AtomKind::Zero;
    else if (lex_.peek().kind == Tok::LParen)
      throw Error(ErrorCode::UnknownAtom, "unknown atom '" + std::string(n) + "' at offset " + std::to_string(name.offset),
                  name.offset);
    else
      syntax_error(name.offset, "expected atom");

    expect(Tok::LParen);
    switch (term.kind) {
      case AtomKind::SumSquares:
      case AtomKind::Norm1:
      case AtomKind::Norm2:
        term.argument = shifted_argument();
        break;
      case AtomKind::Huber: {
        term.argument = shifted_argument();
        expect(Tok::Comma);
        const Token m = expect(Tok::Number);
        if (!(m.number > 0.0)) syntax_error(m.offset, "huber threshold must be positive");
        term.huber_threshold = m.number;
        break;
      }
      case AtomKind::Linear:
        term.argument = symbol();
        break;
      case AtomKind::Zero:
        break;
    }
    expect(Tok::RParen);
    return term;
  }

  BoxClause box_clause() {
    const Token name = expect(Tok::Ident);
    if (name.text != "box") syntax_error(name.offset, "expected 'box'");
    expect(Tok::LParen);
    BoxClause b;
    b.lower = bound();
    expect(Tok::Comma);
    b.upper = bound();
    expect(Tok::RParen);
    return b;
  }

  ObjectiveTemplate node_template() {
    ObjectiveTemplate t;
    t.terms.push_back(node_term());
    while (accept(Tok::Plus)) t.terms.push_back(node_term());
    while (lex_.peek().kind == Tok::Semicolon) {
      const Token semi = lex_.take();
      BoxClause b = box_clause();
      if (t.box) throw Error(ErrorCode::DuplicateBox, "second box clause at offset " + std::to_string(semi.offset), semi.offset);
      t.box = std::move(b);
    }
    finish();
    return t;
  }

  EdgeTerm edge_term() {
    const Token name = expect(Tok::Ident);
    EdgeTerm term;
    if (name.text == "zero") term.kind = EdgeAtomKind::Zero;
    else if (name.text == "sq_diff") term.kind = EdgeAtomKind::SqDiff;
    else if (name.text == "netlasso") term.kind = EdgeAtomKind::NetLasso;
    else if (name.text == "abs_diff") term.kind = EdgeAtomKind::AbsDiff;
    else if (lex_.peek().kind == Tok::LParen)
      throw Error(ErrorCode::UnknownAtom,
                  "unknown edge atom '" + std::string(name.text) + "' at offset " + std::to_string(name.offset), name.offset);
    else
      syntax_error(name.offset, "expected edge atom");
    expect(Tok::LParen);
    if (term.kind == EdgeAtomKind::Zero) term.weight = Operand::literal(0.0);
    else term.weight = number_or_symbol();
    expect(Tok::RParen);
    return term;
  }

  EdgeObjectiveTemplate edge_template() {
    EdgeObjectiveTemplate t;
    t.terms.push_back(edge_term());
    while (accept(Tok::Plus)) t.terms.push_back(edge_term());
    finish();
    if (t.terms.size() > 1)
      throw Error(ErrorCode::UnsupportedComposite, "edge templates take exactly one atom");
    return t;
  }

  void finish() {
    if (lex_.peek().kind != Tok::End) syntax_error(lex_.peek().offset, "unexpected trailing input");
  }

 private:
  Lexer lex_;
};

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_operand(const Operand& op) {
  return op.is_symbol() ? op.symbol_name() : format_number(op.literal_value());
}

const Vector& lookup(const DataRow& row, const std::string& name) {
  auto it = row.find(name);
  if (it == row.end()) throw Error(ErrorCode::MissingColumn, "data has no column '" + name + "'");
  return it->second;
}

Vector bind_vector(const DataRow& row, const std::string& name, std::size_t dim) {
  const Vector& v = lookup(row, name);
  if (v.size() == dim) return v;
  if (v.size() == 1) return Vector(dim, v[0]);
  throw Error(ErrorCode::RowDimensionMismatch,
              "column '" + name + "' has length " + std::to_string(v.size()) + ", expected " + std::to_string(dim));
}

double bind_scalar(const DataRow& row, const Operand& op, const char* role) {
  if (!op.is_symbol()) return op.literal_value();
  const Vector& v = lookup(row, op.symbol_name());
  if (v.size() != 1)
    throw Error(ErrorCode::RowDimensionMismatch, std::string(role) + " column '" + op.symbol_name() + "' must be scalar");
  return v[0];
}

double bind_weight(const DataRow& row, const Operand& op, const char* role) {
  const double w = bind_scalar(row, op, role);
  if (!(w >= 0.0) || !std::isfinite(w))
    throw Error(ErrorCode::NegativeWeight, std::string(role) + " must be finite and nonnegative");
  return w;
}

void add_symbol(std::vector<std::string>& out, const std::string& s) {
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

}  // namespace

ObjectiveTemplate parse_node_template(std::string_view src) { return Parser(src).node_template(); }

EdgeObjectiveTemplate parse_edge_template(std::string_view src) { return Parser(src).edge_template(); }

std::string render(const ObjectiveTemplate& t) {
  std::string out;
  for (std::size_t i = 0; i < t.terms.size(); ++i) {
    const NodeTerm& term = t.terms[i];
    if (i > 0) out += " + ";
    out += render_operand(term.coefficient) + "*" + std::string(to_string(term.kind)) + "(";
    switch (term.kind) {
      case AtomKind::SumSquares:
      case AtomKind::Norm1:
      case AtomKind::Norm2:
        out += "x - " + term.argument;
        break;
      case AtomKind::Huber:
        out += "x - " + term.argument + ", " + format_number(term.huber_threshold);
        break;
      case AtomKind::Linear:
        out += term.argument;
        break;
      case AtomKind::Zero:
        break;
    }
    out += ")";
  }
  if (t.box) out += "; box(" + render_operand(t.box->lower) + ", " + render_operand(t.box->upper) + ")";
  return out;
}

std::string render(const EdgeObjectiveTemplate& t) {
  std::string out;
  for (std::size_t i = 0; i < t.terms.size(); ++i) {
    if (i > 0) out += " + ";
    const EdgeTerm& term = t.terms[i];
    out += std::string(to_string(term.kind)) + "(";
    if (term.kind != EdgeAtomKind::Zero) out += render_operand(term.weight);
    out += ")";
  }
  return out;
}

std::vector<std::string> symbols(const ObjectiveTemplate& t) {
  std::vector<std::string> out;
  for (const NodeTerm& term : t.terms) {
    if (term.coefficient.is_symbol()) add_symbol(out, term.coefficient.symbol_name());
    if (!term.argument.empty()) add_symbol(out, term.argument);
  }
  if (t.box) {
    if (t.box->lower.is_symbol()) add_symbol(out, t.box->lower.symbol_name());
    if (t.box->upper.is_symbol()) add_symbol(out, t.box->upper.symbol_name());
  }
  return out;
}

std::vector<std::string> symbols(const EdgeObjectiveTemplate& t) {
  std::vector<std::string> out;
  for (const EdgeTerm& term : t.terms)
    if (term.weight.is_symbol()) add_symbol(out, term.weight.symbol_name());
  return out;
}

std::size_t infer_dim(const ObjectiveTemplate& t, const DataRow& row) {
  for (const std::string& s : symbols(t)) {
    const Vector& v = lookup(row, s);
    if (v.size() > 1) return v.size();
  }
  return 1;
}

InstantiatedObjective instantiate(const ObjectiveTemplate& t, const DataRow& row, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::RowDimensionMismatch, "dimension must be positive");
  InstantiatedObjective out;
  for (const NodeTerm& term : t.terms) {
    AtomSpec atom;
    atom.kind = term.kind;
    atom.weight = bind_weight(row, term.coefficient, "coefficient");
    atom.huber_threshold = term.huber_threshold;
    if (term.kind == AtomKind::Linear) atom.slope = bind_vector(row, term.argument, dim);
    else if (term.kind != AtomKind::Zero) atom.shift = bind_vector(row, term.argument, dim);
    if (term.kind == AtomKind::Zero || atom.weight == 0.0) continue;
    out.objective.push_back(std::move(atom));
  }
  if (t.box) {
    const auto side = [&](const Operand& op) {
      return op.is_symbol() ? bind_vector(row, op.symbol_name(), dim) : Vector(dim, op.literal_value());
    };
    out.box = Box{side(t.box->lower), side(t.box->upper)};
  }
  return out;
}

std::vector<EdgeAtomSpec> instantiate(const EdgeObjectiveTemplate& t, const DataRow& row) {
  std::vector<EdgeAtomSpec> out;
  for (const EdgeTerm& term : t.terms) {
    const double w = term.kind == EdgeAtomKind::Zero ? 0.0 : bind_weight(row, term.weight, "edge weight");
    out.push_back(EdgeAtomSpec{term.kind, w});
  }
  return out;
}

}  // namespace netcvx
