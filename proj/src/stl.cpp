#include "specguard/stl.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace specguard::stl {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

const char* cmp_str(Cmp c) {
  switch (c) {
    case Cmp::Le: return "<=";
    case Cmp::Ge: return ">=";
    case Cmp::Lt: return "<";
    case Cmp::Gt: return ">";
  }
  return "?";
}

bool cmp_holds(double lhs, Cmp c, double rhs) {
  switch (c) {
    case Cmp::Le: return lhs <= rhs;
    case Cmp::Ge: return lhs >= rhs;
    case Cmp::Lt: return lhs < rhs;
    case Cmp::Gt: return lhs > rhs;
  }
  return false;
}

bool is_upper(Cmp c) { return c == Cmp::Le || c == Cmp::Lt; }

}  // namespace

Predicate Predicate::compare(std::size_t coord, Cmp cmp, double bound) {
  Predicate p;
  p.kind = Kind::Compare;
  p.coord = coord;
  p.cmp = cmp;
  p.bound = bound;
  return p;
}

Predicate Predicate::abs_compare(std::size_t coord, Cmp cmp, double bound) {
  if (!(bound > 0.0))
    throw Error("predicate abs(x[" + std::to_string(coord) + "]) " + cmp_str(cmp) +
                " " + format_double(bound) + " has a degenerate truth region");
  Predicate p;
  p.kind = Kind::AbsCompare;
  p.coord = coord;
  p.cmp = cmp;
  p.bound = bound;
  return p;
}

Predicate Predicate::interval(std::size_t coord, double lo, double hi) {
  if (!(lo <= hi)) throw Error("predicate interval: lo > hi");
  Predicate p;
  p.kind = Kind::Interval;
  p.coord = coord;
  p.lo = lo;
  p.hi = hi;
  return p;
}

Predicate Predicate::halfspace(std::vector<double> normal, Cmp cmp, double offset) {
  bool any = false;
  for (double a : normal)
    if (a != 0.0) any = true;
  if (!any) throw Error("predicate halfspace: zero normal vector");
  Predicate p;
  p.kind = Kind::Halfspace;
  p.normal = std::move(normal);
  p.cmp = cmp;
  p.offset = offset;
  return p;
}

Predicate Predicate::literal(bool value) {
  Predicate p;
  p.kind = value ? Kind::True : Kind::False;
  return p;
}

bool Predicate::evaluate(std::span<const double> x) const {
  switch (kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Compare:
      if (coord >= x.size()) throw Error("predicate: coordinate out of range");
      return cmp_holds(x[coord], cmp, bound);
    case Kind::AbsCompare:
      if (coord >= x.size()) throw Error("predicate: coordinate out of range");
      return cmp_holds(std::abs(x[coord]), cmp, bound);
    case Kind::Interval:
      if (coord >= x.size()) throw Error("predicate: coordinate out of range");
      return x[coord] >= lo && x[coord] <= hi;
    case Kind::Halfspace: {
      if (normal.size() != x.size()) throw Error("predicate: dimension mismatch");
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += normal[i] * x[i];
      return cmp_holds(dot, cmp, offset);
    }
  }
  return false;
}

namespace {
NodePtr make_node(Node::Op op, NodePtr left = nullptr, NodePtr right = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}
}  // namespace

NodePtr Node::make_true() { return make_node(Op::True); }
NodePtr Node::make_false() { return make_node(Op::False); }
NodePtr Node::make_pred(Predicate p) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pred;
  n->pred = std::move(p);
  return n;
}
NodePtr Node::make_not(NodePtr a) { return make_node(Op::Not, std::move(a)); }
NodePtr Node::make_and(NodePtr a, NodePtr b) {
  return make_node(Op::And, std::move(a), std::move(b));
}
NodePtr Node::make_or(NodePtr a, NodePtr b) {
  return make_node(Op::Or, std::move(a), std::move(b));
}
NodePtr Node::make_until(NodePtr a, NodePtr b) {
  return make_node(Op::Until, std::move(a), std::move(b));
}
NodePtr Node::make_eventually(NodePtr a) {
  return make_node(Op::Eventually, std::move(a));
}
NodePtr Node::make_always(NodePtr a) { return make_node(Op::Always, std::move(a)); }

ParseError::ParseError(const std::string& msg, int line_, int col_)
    : Error(msg + " (line " + std::to_string(line_) + ", column " +
            std::to_string(col_) + ")"),
      line(line_),
      col(col_) {}

namespace {

struct Token {
  enum class Type { Ident, Number, LParen, RParen, LBracket, RBracket, Cmp, End };
  Type type;
  std::string text;
  double number = 0.0;
  Cmp cmp = Cmp::Le;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.type = Token::Type::End;
      t.text = "end of input";
      return t;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.type = Token::Type::Ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        (c == '-' && pos_ + 1 < src_.size() &&
         (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.'))) {
      std::size_t start = pos_;
      if (c == '-') advance();
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        advance();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      }
      t.type = Token::Type::Number;
      t.text = src_.substr(start, pos_ - start);
      t.number = std::strtod(t.text.c_str(), nullptr);
      return t;
    }
    switch (c) {
      case '(': advance(); t.type = Token::Type::LParen; t.text = "("; return t;
      case ')': advance(); t.type = Token::Type::RParen; t.text = ")"; return t;
      case '[': advance(); t.type = Token::Type::LBracket; t.text = "["; return t;
      case ']': advance(); t.type = Token::Type::RBracket; t.text = "]"; return t;
      case '<':
      case '>': {
        advance();
        bool eq = pos_ < src_.size() && src_[pos_] == '=';
        if (eq) advance();
        t.type = Token::Type::Cmp;
        if (c == '<')
          t.cmp = eq ? Cmp::Le : Cmp::Lt;
        else
          t.cmp = eq ? Cmp::Ge : Cmp::Gt;
        t.text = cmp_str(t.cmp);
        return t;
      }
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
  }

private:
  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) { cur_ = lex_.next(); }

  NodePtr parse() {
    NodePtr root;
    if (cur_.type == Token::Type::Ident &&
        (cur_.text == "always" || cur_.text == "eventually")) {
      bool always = cur_.text == "always";
      bump();
      expect(Token::Type::LParen, "'('");
      Predicate p = parse_predicate();
      expect(Token::Type::RParen, "')'");
      root = always ? Node::make_always(Node::make_pred(p))
                    : Node::make_eventually(Node::make_pred(p));
    } else {
      root = parse_until();
    }
    if (cur_.type != Token::Type::End)
      throw ParseError("unexpected token '" + cur_.text + "'", cur_.line, cur_.col);
    return root;
  }

private:
  NodePtr parse_until() {
    NodePtr left = parse_or();
    while (cur_.type == Token::Type::Ident && cur_.text == "until") {
      bump();
      left = Node::make_until(left, parse_or());
    }
    return left;
  }

  NodePtr parse_or() {
    NodePtr left = parse_and();
    while (cur_.type == Token::Type::Ident && cur_.text == "or") {
      bump();
      left = Node::make_or(left, parse_and());
    }
    return left;
  }

  NodePtr parse_and() {
    NodePtr left = parse_unary();
    while (cur_.type == Token::Type::Ident && cur_.text == "and") {
      bump();
      left = Node::make_and(left, parse_unary());
    }
    return left;
  }

  NodePtr parse_unary() {
    if (cur_.type == Token::Type::Ident) {
      if (cur_.text == "not") {
        bump();
        return Node::make_not(parse_unary());
      }
      if (cur_.text == "true") {
        bump();
        return Node::make_true();
      }
      if (cur_.text == "false") {
        bump();
        return Node::make_false();
      }
      if (cur_.text == "x" || cur_.text == "abs")
        return Node::make_pred(parse_predicate());
      throw ParseError("unknown identifier '" + cur_.text + "'", cur_.line, cur_.col);
    }
    if (cur_.type == Token::Type::LParen) {
      bump();
      NodePtr inner = parse_until();
      expect(Token::Type::RParen, "')'");
      return inner;
    }
    throw ParseError("expected formula, got '" + cur_.text + "'", cur_.line, cur_.col);
  }

  Predicate parse_predicate() {
    bool is_abs = false;
    if (cur_.type == Token::Type::Ident && cur_.text == "abs") {
      is_abs = true;
      bump();
      expect(Token::Type::LParen, "'('");
    }
    if (!(cur_.type == Token::Type::Ident && cur_.text == "x"))
      throw ParseError("expected 'x', got '" + cur_.text + "'", cur_.line, cur_.col);
    bump();
    expect(Token::Type::LBracket, "'['");
    if (cur_.type != Token::Type::Number || cur_.number < 0 ||
        cur_.number != std::floor(cur_.number))
      throw ParseError("expected coordinate index, got '" + cur_.text + "'",
                       cur_.line, cur_.col);
    auto coord = static_cast<std::size_t>(cur_.number);
    bump();
    expect(Token::Type::RBracket, "']'");
    if (is_abs) expect(Token::Type::RParen, "')'");
    if (cur_.type != Token::Type::Cmp)
      throw ParseError("expected comparison operator, got '" + cur_.text + "'",
                       cur_.line, cur_.col);
    Cmp cmp = cur_.cmp;
    bump();
    if (cur_.type != Token::Type::Number)
      throw ParseError("expected number, got '" + cur_.text + "'", cur_.line, cur_.col);
    double bound = cur_.number;
    bump();
    return is_abs ? Predicate::abs_compare(coord, cmp, bound)
                  : Predicate::compare(coord, cmp, bound);
  }

  void expect(Token::Type type, const char* what) {
    if (cur_.type != type)
      throw ParseError(std::string("expected ") + what + ", got '" + cur_.text + "'",
                       cur_.line, cur_.col);
    bump();
  }
  void bump() { cur_ = lex_.next(); }

  Lexer lex_;
  Token cur_;
};

std::string pred_to_string(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::True: return "true";
    case Predicate::Kind::False: return "false";
    case Predicate::Kind::Compare:
      return "x[" + std::to_string(p.coord) + "] " + cmp_str(p.cmp) + " " +
             format_double(p.bound);
    case Predicate::Kind::AbsCompare:
      return "abs(x[" + std::to_string(p.coord) + "]) " + cmp_str(p.cmp) + " " +
             format_double(p.bound);
    case Predicate::Kind::Interval:
      return "(x[" + std::to_string(p.coord) + "] >= " + format_double(p.lo) +
             " and x[" + std::to_string(p.coord) + "] <= " + format_double(p.hi) + ")";
    case Predicate::Kind::Halfspace: {
      std::ostringstream os;
      os << "<halfspace " << cmp_str(p.cmp) << " " << format_double(p.offset) << ">";
      return os.str();
    }
  }
  return "?";
}

}  // namespace

Spec parse_spec(const std::string& text) {
  Parser parser(text);
  NodePtr root = parser.parse();
  return Spec{root, to_string(root)};
}

std::string to_string(const NodePtr& node) {
  switch (node->op) {
    case Node::Op::True: return "true";
    case Node::Op::False: return "false";
    case Node::Op::Pred: return pred_to_string(node->pred);
    case Node::Op::Not: return "not (" + to_string(node->left) + ")";
    case Node::Op::And:
      return "(" + to_string(node->left) + " and " + to_string(node->right) + ")";
    case Node::Op::Or:
      return "(" + to_string(node->left) + " or " + to_string(node->right) + ")";
    case Node::Op::Until:
      return "(" + to_string(node->left) + " until " + to_string(node->right) + ")";
    case Node::Op::Eventually: return "eventually (" + to_string(node->left) + ")";
    case Node::Op::Always: return "always (" + to_string(node->left) + ")";
  }
  return "?";
}

bool certifiable(const Spec& spec) {
  if (!spec.root) return false;
  if (spec.root->op != Node::Op::Always && spec.root->op != Node::Op::Eventually)
    return false;
  return spec.root->left && spec.root->left->op == Node::Op::Pred;
}

namespace {

double coord_weight(const Predicate& p, const WeightedNorm& nrm) {
  if (p.coord >= nrm.dim())
    throw Error("signed_distance: predicate coordinate " + std::to_string(p.coord) +
                " out of range for norm of dimension " + std::to_string(nrm.dim()));
  double w = nrm.weights[p.coord];
  if (w <= 0.0)
    throw Error("signed_distance: norm weight on predicate coordinate " +
                std::to_string(p.coord) + " is zero; distance is degenerate");
  return w;
}

}  // namespace

double signed_distance(const Predicate& p, std::span<const double> x,
                       const WeightedNorm& nrm) {
  if (x.size() != nrm.dim()) throw Error("signed_distance: dimension mismatch");
  switch (p.kind) {
    case Predicate::Kind::True: return 1.0;
    case Predicate::Kind::False: return -1.0;
    case Predicate::Kind::Compare: {
      double s = std::sqrt(coord_weight(p, nrm));
      double margin = is_upper(p.cmp) ? p.bound - x[p.coord] : x[p.coord] - p.bound;
      return s * margin;
    }
    case Predicate::Kind::AbsCompare: {
      double s = std::sqrt(coord_weight(p, nrm));
      double margin = is_upper(p.cmp) ? p.bound - std::abs(x[p.coord])
                                      : std::abs(x[p.coord]) - p.bound;
      return s * margin;
    }
    case Predicate::Kind::Interval: {
      double s = std::sqrt(coord_weight(p, nrm));
      return s * std::min(x[p.coord] - p.lo, p.hi - x[p.coord]);
    }
    case Predicate::Kind::Halfspace: {
      if (p.normal.size() != x.size())
        throw Error("signed_distance: halfspace dimension mismatch");
      double dual_sq = 0.0;
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (p.normal[i] == 0.0) continue;
        double w = nrm.weights[i];
        if (w <= 0.0)
          throw Error("signed_distance: halfspace normal touches a zero-weight coordinate");
        dual_sq += p.normal[i] * p.normal[i] / w;
        dot += p.normal[i] * x[i];
      }
      double margin = is_upper(p.cmp) ? p.offset - dot : dot - p.offset;
      return margin / std::sqrt(dual_sq);
    }
  }
  throw Error("signed_distance: unhandled predicate kind");
}

RobustnessMeasure build_measure(const Spec& spec, const WeightedNorm& nrm) {
  validate_norm(nrm);
  if (!certifiable(spec))
    throw Error("build_measure: specification '" + spec.text +
                "' is outside the reach-avoid fragment "
                "(expected always(pred) or eventually(pred))");
  RobustnessMeasure m;
  m.pred = spec.root->left->pred;
  m.mode = spec.root->op == Node::Op::Always ? TemporalMode::MinOverTime
                                             : TemporalMode::MaxOverTime;
  m.lipschitz_constant = 1.0;
  m.norm = nrm;
  // Fail fast on degenerate geometry (zero weight on the predicate coordinate).
  std::vector<double> probe(nrm.dim(), 0.0);
  signed_distance(m.pred, probe, nrm);
  return m;
}

double robustness(const RobustnessMeasure& m, const Trajectory& s) {
  if (s.dim() != m.norm.dim())
    throw Error("robustness: trajectory dimension does not match the measure");
  double acc = signed_distance(m.pred, s.state(0), m.norm);
  for (std::size_t i = 1; i < s.size(); ++i) {
    double h = signed_distance(m.pred, s.state(i), m.norm);
    acc = m.mode == TemporalMode::MinOverTime ? std::min(acc, h) : std::max(acc, h);
  }
  return acc;
}

namespace {

// Recursive satisfaction over the sample grid, evaluated at sample index k.
bool sat(const NodePtr& node, const Trajectory& s, std::size_t k) {
  switch (node->op) {
    case Node::Op::True: return true;
    case Node::Op::False: return false;
    case Node::Op::Pred: return node->pred.evaluate(s.state(k));
    case Node::Op::Not: return !sat(node->left, s, k);
    case Node::Op::And: return sat(node->left, s, k) && sat(node->right, s, k);
    case Node::Op::Or: return sat(node->left, s, k) || sat(node->right, s, k);
    case Node::Op::Until:
      for (std::size_t kstar = 0; kstar <= k; ++kstar) {
        if (sat(node->right, s, kstar)) {
          bool prefix_ok = true;
          for (std::size_t j = 0; j < kstar && prefix_ok; ++j)
            prefix_ok = sat(node->left, s, j);
          if (prefix_ok) return true;
        }
      }
      return false;
    case Node::Op::Eventually:
      for (std::size_t kstar = 0; kstar <= k; ++kstar)
        if (sat(node->left, s, kstar)) return true;
      return false;
    case Node::Op::Always:
      for (std::size_t kstar = 0; kstar <= k; ++kstar)
        if (!sat(node->left, s, kstar)) return false;
      return true;
  }
  return false;
}

}  // namespace

bool satisfies(const Spec& spec, const Trajectory& s) {
  return sat(spec.root, s, s.size() - 1);
}

}  // namespace specguard::stl
