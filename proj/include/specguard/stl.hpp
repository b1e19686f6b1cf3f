#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specguard/signals.hpp"

namespace specguard::stl {

enum class Cmp { Le, Ge, Lt, Gt };

/// An atomic proposition. Supported geometries are single-coordinate
/// comparisons (plain or on |x_i|), closed intervals on one coordinate, and
/// affine half-spaces, all of which admit a closed-form signed distance under
/// a weighted Euclidean norm.
struct Predicate {
  enum class Kind { True, False, Compare, AbsCompare, Interval, Halfspace };

  Kind kind = Kind::True;

  // Compare / AbsCompare / Interval
  std::size_t coord = 0;
  Cmp cmp = Cmp::Le;
  double bound = 0.0;

  // Interval: lo <= x[coord] <= hi
  double lo = 0.0;
  double hi = 0.0;

  // Halfspace: a . x <= c  (or >= per cmp)
  std::vector<double> normal;
  double offset = 0.0;

  static Predicate compare(std::size_t coord, Cmp cmp, double bound);
  static Predicate abs_compare(std::size_t coord, Cmp cmp, double bound);
  static Predicate interval(std::size_t coord, double lo, double hi);
  static Predicate halfspace(std::vector<double> normal, Cmp cmp, double offset);
  static Predicate literal(bool value);

  /// Boolean truth evaluation, honoring strict comparisons.
  bool evaluate(std::span<const double> x) const;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// STL formula AST. Eventually and Always are first-class sugar nodes for
/// True Until Phi and not(True Until not Phi).
struct Node {
  enum class Op { True, False, Pred, Not, And, Or, Until, Eventually, Always };

  Op op = Op::True;
  Predicate pred;          // Op::Pred only
  NodePtr left, right;     // unary ops use left

  static NodePtr make_true();
  static NodePtr make_false();
  static NodePtr make_pred(Predicate p);
  static NodePtr make_not(NodePtr a);
  static NodePtr make_and(NodePtr a, NodePtr b);
  static NodePtr make_or(NodePtr a, NodePtr b);
  static NodePtr make_until(NodePtr a, NodePtr b);
  static NodePtr make_eventually(NodePtr a);
  static NodePtr make_always(NodePtr a);
};

struct Spec {
  NodePtr root;
  std::string text;  // pretty-printed form
};

class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line, int col);
  int line, col;
};

/// Grammar:
///   spec      := "always" "(" pred ")" | "eventually" "(" pred ")" | bool-expr
///   bool-expr := or-expr ("until" or-expr)*
///   or-expr   := and-expr ("or" and-expr)*
///   and-expr  := unary ("and" unary)*
///   unary     := "not" unary | "(" bool-expr ")" | "true" | "false" | pred
///   pred      := term cmp number
///   term      := "x[" int "]" | "abs(" "x[" int "]" ")"
///   cmp       := "<=" | ">=" | "<" | ">"
Spec parse_spec(const std::string& text);

std::string to_string(const NodePtr& node);

/// True iff the formula is in the reach-avoid fragment: Eventually(Pred) or
/// Always(Pred).
bool certifiable(const Spec& spec);

/// Signed distance of x to the predicate boundary in the given norm:
/// positive inside the truth region, negative outside, (1, nrm)-Lipschitz.
/// Literal true/false predicates map to the constants +1 / -1.
double signed_distance(const Predicate& p, std::span<const double> x,
                       const WeightedNorm& nrm);

enum class TemporalMode { MinOverTime, MaxOverTime };

/// Lipschitz robustness measure for a reach-avoid spec: fold the inner
/// predicate's signed distance over time with min (Always) or max
/// (Eventually). L = 1 under the construction used here.
struct RobustnessMeasure {
  Predicate pred;
  TemporalMode mode = TemporalMode::MinOverTime;
  double lipschitz_constant = 1.0;
  WeightedNorm norm;
};

RobustnessMeasure build_measure(const Spec& spec, const WeightedNorm& nrm);

double robustness(const RobustnessMeasure& m, const Trajectory& s);

/// Independent boolean satisfaction monitor over the sample grid, for the
/// full boolean/Until fragment. Implemented without reference to
/// robustness() so it can serve as its oracle.
bool satisfies(const Spec& spec, const Trajectory& s);

}  // namespace specguard::stl
