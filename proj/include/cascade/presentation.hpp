#pragma once

// Finite presentations of cascades on countable compact ultrametric spaces.
//
// A CascadeExpr describes the space and the homeomorphism together:
//
//   cycle(k)            k points rotated by one step
//   tower(E0, ..., F)   pieces converging to one added fixed point (the star);
//                       the final family F supplies all remaining pieces
//   sum(A, B)           disjoint union
//   cycleof(B, m)       m copies of B; the map advances the copy index and
//                       applies B's map on wraparound
//   shift2              Z plus two limit points, n -> n+1
//   ishift              a convergent sequence with an interleaved shift
//
// Points are addressed by paths through the expression tree (PointId).

#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade/arith.hpp"
#include "cascade/error.hpp"

namespace cascade {

/// Cycle-length rule n -> g(n) for the tail of a tower.
struct Family {
  enum class Kind { Const, Linear, Geometric };

  Kind kind = Kind::Const;
  i64 a = 1;  // Const: the value. Linear: slope. Geometric: coefficient.
  i64 b = 0;  // Linear: intercept. Geometric: ratio.

  static Family constant(i64 k) { return {Kind::Const, k, 0}; }
  static Family linear(i64 slope, i64 intercept) { return {Kind::Linear, slope, intercept}; }
  static Family geometric(i64 coeff, i64 ratio) { return {Kind::Geometric, coeff, ratio}; }

  i64 at(i64 n) const {
    switch (kind) {
      case Kind::Const:
        return a;
      case Kind::Linear:
        return checked_add(checked_mul(a, n), b);
      case Kind::Geometric:
        return checked_mul(a, checked_pow(b, n));
    }
    return 0;
  }

  /// Takes finitely many values.
  bool bounded() const {
    return kind == Kind::Const || (kind == Kind::Linear && a == 0) ||
           (kind == Kind::Geometric && b == 1);
  }

  Family scaled(i64 m) const {
    switch (kind) {
      case Kind::Const:
        return constant(checked_mul(a, m));
      case Kind::Linear:
        return linear(checked_mul(a, m), checked_mul(b, m));
      case Kind::Geometric:
        return geometric(checked_mul(a, m), b);
    }
    return *this;
  }

  /// Least n >= start with at(n) == q.
  std::optional<i64> index_of(i64 q, i64 start = 0) const {
    switch (kind) {
      case Kind::Const:
        return q == a ? std::optional<i64>(start) : std::nullopt;
      case Kind::Linear: {
        if (a == 0) return q == b ? std::optional<i64>(start) : std::nullopt;
        const i64 diff = q - b;
        if (diff % a != 0 || diff / a < start) return std::nullopt;
        return diff / a;
      }
      case Kind::Geometric: {
        if (b == 1) return q == a ? std::optional<i64>(start) : std::nullopt;
        if (q <= 0 || q % a != 0) return std::nullopt;
        i64 v = q / a;
        i64 n = 0;
        while (v % b == 0) {
          v /= b;
          ++n;
        }
        if (v != 1 || n < start) return std::nullopt;
        return n;
      }
    }
    return std::nullopt;
  }

  bool contains(i64 q, i64 start = 0) const { return index_of(q, start).has_value(); }

  std::string to_string() const {
    switch (kind) {
      case Kind::Const:
        return std::to_string(a);
      case Kind::Linear:
        return std::to_string(a) + "*n+" + std::to_string(b);
      case Kind::Geometric:
        if (a == 1) return std::to_string(b) + "^n";
        return std::to_string(a) + "*" + std::to_string(b) + "^n";
    }
    return {};
  }

  bool operator==(const Family&) const = default;
};

struct Node;

/// Immutable, cheaply copyable handle to a presentation tree.
class CascadeExpr {
 public:
  CascadeExpr() = default;
  explicit CascadeExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static CascadeExpr cycle(i64 k);
  static CascadeExpr tower(std::vector<CascadeExpr> head, Family tail);
  static CascadeExpr tower_rep(std::vector<CascadeExpr> head, CascadeExpr repeated);
  static CascadeExpr sum(CascadeExpr left, CascadeExpr right);
  static CascadeExpr cycle_of(CascadeExpr base, i64 copies);
  static CascadeExpr shift2();
  static CascadeExpr ishift();

  const Node& node() const { return *node_; }
  bool valid() const { return node_ != nullptr; }

  friend bool operator==(const CascadeExpr& a, const CascadeExpr& b);

 private:
  std::shared_ptr<const Node> node_;
};

struct CycleNode {
  i64 k;
  bool operator==(const CycleNode&) const = default;
};

struct TowerNode {
  std::vector<CascadeExpr> head;
  std::variant<Family, CascadeExpr> tail;  // cycle(g(n)) pieces, or copies of one expression
  bool operator==(const TowerNode&) const = default;

  i64 first_tail_index() const { return static_cast<i64>(head.size()); }
};

struct SumNode {
  CascadeExpr left;
  CascadeExpr right;
  bool operator==(const SumNode&) const = default;
};

struct CycleOfNode {
  CascadeExpr base;
  i64 copies;
  bool operator==(const CycleOfNode&) const = default;
};

struct Shift2Node {
  bool operator==(const Shift2Node&) const = default;
};

struct IShiftNode {
  bool operator==(const IShiftNode&) const = default;
};

struct Node {
  std::variant<CycleNode, TowerNode, SumNode, CycleOfNode, Shift2Node, IShiftNode> v;
  bool operator==(const Node&) const = default;
};

inline bool operator==(const CascadeExpr& a, const CascadeExpr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  return *a.node_ == *b.node_;
}

inline CascadeExpr CascadeExpr::cycle(i64 k) {
  if (k < 1) throw Error("cycle length must be positive");
  return CascadeExpr(std::make_shared<const Node>(Node{CycleNode{k}}));
}
inline CascadeExpr CascadeExpr::tower(std::vector<CascadeExpr> head, Family tail) {
  if (tail.at(static_cast<i64>(head.size())) < 1 || tail.a < 0 || tail.b < 0)
    throw Error("tower family must produce positive cycle lengths");
  return CascadeExpr(std::make_shared<const Node>(Node{TowerNode{std::move(head), tail}}));
}
inline CascadeExpr CascadeExpr::tower_rep(std::vector<CascadeExpr> head, CascadeExpr repeated) {
  return CascadeExpr(
      std::make_shared<const Node>(Node{TowerNode{std::move(head), std::move(repeated)}}));
}
inline CascadeExpr CascadeExpr::sum(CascadeExpr left, CascadeExpr right) {
  return CascadeExpr(
      std::make_shared<const Node>(Node{SumNode{std::move(left), std::move(right)}}));
}
inline CascadeExpr CascadeExpr::cycle_of(CascadeExpr base, i64 copies) {
  if (copies < 1) throw Error("copy count must be positive");
  return CascadeExpr(std::make_shared<const Node>(Node{CycleOfNode{std::move(base), copies}}));
}
inline CascadeExpr CascadeExpr::shift2() {
  return CascadeExpr(std::make_shared<const Node>(Node{Shift2Node{}}));
}
inline CascadeExpr CascadeExpr::ishift() {
  return CascadeExpr(std::make_shared<const Node>(Node{IShiftNode{}}));
}

// ---------------------------------------------------------------------------
// Printer and parser

std::string to_string(const CascadeExpr& e);

namespace detail {

inline void print_expr(const CascadeExpr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CycleNode>) {
          out += "cycle(" + std::to_string(n.k) + ")";
        } else if constexpr (std::is_same_v<T, TowerNode>) {
          out += "tower(";
          for (const auto& h : n.head) {
            print_expr(h, out);
            out += ",";
          }
          if (const auto* fam = std::get_if<Family>(&n.tail)) {
            out += "cycle(" + fam->to_string() + ")";
          } else {
            out += "rep(";
            print_expr(std::get<CascadeExpr>(n.tail), out);
            out += ")";
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, SumNode>) {
          out += "sum(";
          print_expr(n.left, out);
          out += ",";
          print_expr(n.right, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, CycleOfNode>) {
          out += "cycleof(";
          print_expr(n.base, out);
          out += "," + std::to_string(n.copies) + ")";
        } else if constexpr (std::is_same_v<T, Shift2Node>) {
          out += "shift2";
        } else {
          out += "ishift";
        }
      },
      e.node().v);
}

/// Recursive-descent parser over the cascade grammar.
class CascadeParser {
 public:
  explicit CascadeParser(std::string_view text) : text_(text) {}

  CascadeExpr parse_all() {
    CascadeExpr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) error("unexpected trailing input");
    return e;
  }

 private:
  static constexpr i64 kMaxNat = i64{1} << 40;
  static constexpr int kMaxNesting = 256;

  [[noreturn]] void error(const std::string& msg) const {
    auto [line, col] = location(pos_);
    throw ParseError(msg, line, col);
  }
  [[noreturn]] void semantic(const std::string& msg, std::size_t at) const {
    auto [line, col] = location(at);
    throw SemanticError(msg, line, col);
  }

  std::pair<std::size_t, std::size_t> location(std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek_char(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view peek_word() {
    skip_ws();
    std::size_t end = pos_;
    while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
    return text_.substr(pos_, end - pos_);
  }

  i64 parse_nat() {
    skip_ws();
    std::size_t start = pos_;
    i64 v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > kMaxNat) semantic("number too large", start);
      ++pos_;
    }
    if (pos_ == start) error("expected a natural number");
    return v;
  }

  Family parse_formula() {
    const i64 first = parse_nat();
    if (peek_char('*')) {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == 'n') {
        ++pos_;
        expect('+');
        const i64 intercept = parse_nat();
        return Family::linear(first, intercept);
      }
      const i64 ratio = parse_nat();
      expect('^');
      expect_n();
      return Family::geometric(first, ratio);
    }
    if (peek_char('^')) {
      ++pos_;
      expect_n();
      return Family::geometric(1, first);
    }
    return Family::constant(first);
  }

  void expect_n() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != 'n') error("expected 'n'");
    ++pos_;
  }

  CascadeExpr parse_expr() {
    if (++nesting_ > kMaxNesting) error("expression nested too deeply");
    const std::size_t start = pos_;
    const std::string_view word = peek_word();
    CascadeExpr result;
    if (word == "cycle") {
      pos_ += word.size();
      expect('(');
      const std::size_t at = pos_;
      const Family f = parse_formula();
      expect(')');
      if (f.kind != Family::Kind::Const) semantic("cycle family allowed only as a tower tail", at);
      if (f.a < 1) semantic("cycle length must be at least 1", at);
      result = CascadeExpr::cycle(f.a);
    } else if (word == "cycleof") {
      pos_ += word.size();
      expect('(');
      CascadeExpr base = parse_expr();
      expect(',');
      const std::size_t at = pos_;
      const i64 m = parse_nat();
      expect(')');
      if (m < 1) semantic("copy count must be at least 1", at);
      result = CascadeExpr::cycle_of(std::move(base), m);
    } else if (word == "sum") {
      pos_ += word.size();
      expect('(');
      CascadeExpr left = parse_expr();
      expect(',');
      CascadeExpr right = parse_expr();
      expect(')');
      result = CascadeExpr::sum(std::move(left), std::move(right));
    } else if (word == "tower") {
      pos_ += word.size();
      result = parse_tower();
    } else if (word == "shift2") {
      pos_ += word.size();
      result = CascadeExpr::shift2();
    } else if (word == "ishift") {
      pos_ += word.size();
      result = CascadeExpr::ishift();
    } else {
      pos_ = start;
      skip_ws();
      error("expected cycle, tower, sum, cycleof, shift2 or ishift");
    }
    --nesting_;
    return result;
  }

  CascadeExpr parse_tower() {
    expect('(');
    std::vector<CascadeExpr> head;
    for (;;) {
      const std::string_view word = peek_word();
      if (word == "rep") {
        pos_ += word.size();
        expect('(');
        CascadeExpr rep = parse_expr();
        expect(')');
        expect(')');
        return CascadeExpr::tower_rep(std::move(head), std::move(rep));
      }
      if (word == "cycle") {
        pos_ += word.size();
        expect('(');
        const std::size_t at = pos_;
        const Family f = parse_formula();
        expect(')');
        if (peek_char(')')) {
          ++pos_;
          check_family(f, static_cast<i64>(head.size()), at);
          return CascadeExpr::tower(std::move(head), f);
        }
        if (f.kind != Family::Kind::Const) semantic("cycle family must be the last tower item", at);
        if (f.a < 1) semantic("cycle length must be at least 1", at);
        head.push_back(CascadeExpr::cycle(f.a));
        expect(',');
        continue;
      }
      head.push_back(parse_expr());
      if (peek_char(')')) error("tower must end with a cycle(...) or rep(...) family");
      expect(',');
    }
  }

  void check_family(const Family& f, i64 start, std::size_t at) const {
    if (f.kind == Family::Kind::Geometric && (f.a < 1 || f.b < 1))
      semantic("geometric family needs positive coefficient and ratio", at);
    i64 first = 0;
    try {
      first = f.at(start);
    } catch (const Overflow&) {
      semantic("family value overflows", at);
    }
    if (first < 1) semantic("family must produce cycle lengths of at least 1", at);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int nesting_ = 0;
};

}  // namespace detail

inline std::string to_string(const CascadeExpr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

inline CascadeExpr parse_cascade(std::string_view text) {
  return detail::CascadeParser(text).parse_all();
}

// ---------------------------------------------------------------------------
// Points

struct PathStep {
  enum class Kind : std::uint8_t {
    Left,      // sum: left component
    Right,     // sum: right component
    Copy,      // cycleof: copy index
    Piece,     // tower: piece index
    Star,      // tower: the limit point
    Pos,       // cycle: position
    Int,       // shift2: integer
    PlusInf,   // shift2: +inf
    MinusInf,  // shift2: -inf
    Index,     // ishift: x_n
    Inf,       // ishift: the limit point
  };
  Kind kind;
  i64 value = 0;

  auto operator<=>(const PathStep&) const = default;
};

/// Canonical address of a point: a path through the expression tree.
struct PointId {
  std::vector<PathStep> steps;

  auto operator<=>(const PointId&) const = default;
};

inline std::string to_string(const PointId& p) {
  std::string out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out += '.';
    const PathStep& s = p.steps[i];
    using K = PathStep::Kind;
    switch (s.kind) {
      case K::Left: out += "L"; break;
      case K::Right: out += "R"; break;
      case K::Copy: out += "c" + std::to_string(s.value); break;
      case K::Piece: out += "p" + std::to_string(s.value); break;
      case K::Star: out += "*"; break;
      case K::Pos: out += std::to_string(s.value); break;
      case K::Int: out += std::to_string(s.value); break;
      case K::PlusInf: out += "+inf"; break;
      case K::MinusInf: out += "-inf"; break;
      case K::Index: out += "x" + std::to_string(s.value); break;
      case K::Inf: out += "inf"; break;
    }
  }
  return out;
}

namespace detail {

/// A node of the presentation, or a cycle generated by a tower family.
struct View {
  const Node* node = nullptr;  // nullptr: Cycle(k)
  i64 k = 0;
};

inline View view(const CascadeExpr& e) { return View{&e.node(), 0}; }

inline View piece_view(const TowerNode& t, i64 i) {
  if (i < t.first_tail_index()) return view(t.head[static_cast<std::size_t>(i)]);
  if (const auto* fam = std::get_if<Family>(&t.tail)) return View{nullptr, fam->at(i)};
  return view(std::get<CascadeExpr>(t.tail));
}

template <class F>
decltype(auto) dispatch(View v, F&& f) {
  if (v.node == nullptr) return f(CycleNode{v.k});
  return std::visit(std::forward<F>(f), v.node->v);
}

[[noreturn]] inline void bad_point(const std::string& why) {
  throw InvalidPoint("invalid point: " + why);
}

inline const PathStep& step_at(const PointId& x, std::size_t pos) {
  if (pos >= x.steps.size()) bad_point("address ends early");
  return x.steps[pos];
}

inline void validate(View v, const PointId& x, std::size_t pos) {
  using K = PathStep::Kind;
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    const PathStep& s = step_at(x, pos);
    if constexpr (std::is_same_v<T, CycleNode>) {
      if (s.kind != K::Pos || s.value < 0 || s.value >= n.k) bad_point("bad cycle position");
      if (pos + 1 != x.steps.size()) bad_point("address too long");
    } else if constexpr (std::is_same_v<T, SumNode>) {
      if (s.kind == K::Left)
        validate(view(n.left), x, pos + 1);
      else if (s.kind == K::Right)
        validate(view(n.right), x, pos + 1);
      else
        bad_point("expected L or R");
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      if (s.kind != K::Copy || s.value < 0 || s.value >= n.copies) bad_point("bad copy index");
      validate(view(n.base), x, pos + 1);
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Star) {
        if (pos + 1 != x.steps.size()) bad_point("address too long");
      } else if (s.kind == K::Piece && s.value >= 0) {
        validate(piece_view(n, s.value), x, pos + 1);
      } else {
        bad_point("expected piece index or *");
      }
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (s.kind != K::Int && s.kind != K::PlusInf && s.kind != K::MinusInf)
        bad_point("expected integer or +-inf");
      if (pos + 1 != x.steps.size()) bad_point("address too long");
    } else {
      if (!(s.kind == K::Inf || (s.kind == K::Index && s.value >= 0)))
        bad_point("expected x<n> or inf");
      if (pos + 1 != x.steps.size()) bad_point("address too long");
    }
  });
}

inline constexpr std::size_t kMaxEnumerated = std::size_t{1} << 21;

inline void enumerate(View v, i64 depth, PointId& prefix, std::vector<PointId>& out) {
  using K = PathStep::Kind;
  auto emit = [&](PathStep s) {
    if (out.size() >= kMaxEnumerated)
      throw Overflow("more than " + std::to_string(kMaxEnumerated) + " points at this depth");
    prefix.steps.push_back(s);
    out.push_back(prefix);
    prefix.steps.pop_back();
  };
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      for (i64 i = 0; i < n.k; ++i) emit({K::Pos, i});
    } else if constexpr (std::is_same_v<T, SumNode>) {
      prefix.steps.push_back({K::Left});
      enumerate(view(n.left), depth, prefix, out);
      prefix.steps.back() = {K::Right};
      enumerate(view(n.right), depth, prefix, out);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      for (i64 j = 0; j < n.copies; ++j) {
        prefix.steps.push_back({K::Copy, j});
        enumerate(view(n.base), depth, prefix, out);
        prefix.steps.pop_back();
      }
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      const i64 last = std::max(depth, n.first_tail_index());
      for (i64 i = 0; i <= last; ++i) {
        prefix.steps.push_back({K::Piece, i});
        enumerate(piece_view(n, i), depth, prefix, out);
        prefix.steps.pop_back();
      }
      emit({K::Star});
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      for (i64 z = -depth; z <= depth; ++z) emit({K::Int, z});
      emit({K::MinusInf});
      emit({K::PlusInf});
    } else {
      for (i64 i = 0; i <= depth; ++i) emit({K::Index, i});
      emit({K::Inf});
    }
  });
}

// Interleaved shift as a Z-orbit: x0 -> 0, x_{2k} -> k, x_{2k-1} -> -k.
inline i64 ishift_coord(i64 index) {
  if (index == 0) return 0;
  if (index % 2 == 0) return index / 2;
  return -(index + 1) / 2;
}
inline i64 ishift_index(i64 coord) {
  if (coord == 0) return 0;
  if (coord > 0) return checked_mul(coord, 2);
  return checked_add(checked_mul(-coord, 2), -1);
}

inline void forward(View v, PointId& x, std::size_t pos) {
  using K = PathStep::Kind;
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      s.value = (s.value + 1 == n.k) ? 0 : s.value + 1;
    } else if constexpr (std::is_same_v<T, SumNode>) {
      forward(view(s.kind == K::Left ? n.left : n.right), x, pos + 1);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      if (s.value + 1 < n.copies) {
        ++s.value;
      } else {
        s.value = 0;
        forward(view(n.base), x, pos + 1);
      }
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Piece) forward(piece_view(n, s.value), x, pos + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (s.kind == K::Int) s.value = checked_add(s.value, 1);
    } else {
      if (s.kind == K::Index) {
        // f(x_{2n+1}) = x_{2n-1} for n >= 1, f(x_1) = x_0, f(x_{2n}) = x_{2n+2}
        if (s.value == 1)
          s.value = 0;
        else if (s.value % 2 == 1)
          s.value -= 2;
        else
          s.value = checked_add(s.value, 2);
      }
    }
  });
}

inline void backward(View v, PointId& x, std::size_t pos) {
  using K = PathStep::Kind;
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      s.value = (s.value == 0) ? n.k - 1 : s.value - 1;
    } else if constexpr (std::is_same_v<T, SumNode>) {
      backward(view(s.kind == K::Left ? n.left : n.right), x, pos + 1);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      if (s.value > 0) {
        --s.value;
      } else {
        s.value = n.copies - 1;
        backward(view(n.base), x, pos + 1);
      }
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Piece) backward(piece_view(n, s.value), x, pos + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (s.kind == K::Int) s.value = checked_add(s.value, -1);
    } else {
      if (s.kind == K::Index) {
        if (s.value == 0)
          s.value = 1;
        else if (s.value % 2 == 1)
          s.value = checked_add(s.value, 2);
        else
          s.value -= 2;
      }
    }
  });
}

inline void power(View v, PointId& x, std::size_t pos, i64 m) {
  using K = PathStep::Kind;
  if (m == 0) return;
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      s.value = floor_mod(checked_add(s.value, floor_mod(m, n.k)), n.k);
    } else if constexpr (std::is_same_v<T, SumNode>) {
      power(view(s.kind == K::Left ? n.left : n.right), x, pos + 1, m);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      const i64 shifted = checked_add(s.value, m);
      const i64 wraps = floor_div(shifted, n.copies);
      s.value = floor_mod(shifted, n.copies);
      power(view(n.base), x, pos + 1, wraps);
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Piece) power(piece_view(n, s.value), x, pos + 1, m);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (s.kind == K::Int) s.value = checked_add(s.value, m);
    } else {
      if (s.kind == K::Index) s.value = ishift_index(checked_add(ishift_coord(s.value), m));
    }
  });
}

// Distances are 0 or 2^-e. `scale` is the exponent of the current block's scale.
inline Dyadic dist(View v, const PointId& x, const PointId& y, std::size_t pos, i64 scale) {
  using K = PathStep::Kind;
  return dispatch(v, [&](const auto& n) -> Dyadic {
    using T = std::decay_t<decltype(n)>;
    const PathStep& a = x.steps[pos];
    const PathStep& b = y.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      return a == b ? Dyadic::zero() : Dyadic::inv_pow2(scale);
    } else if constexpr (std::is_same_v<T, SumNode>) {
      if (a.kind != b.kind) return Dyadic::inv_pow2(scale);
      return dist(view(a.kind == K::Left ? n.left : n.right), x, y, pos + 1, scale);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      if (a.value != b.value) return Dyadic::inv_pow2(scale);
      return dist(view(n.base), x, y, pos + 1, scale);
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (a.kind == K::Star && b.kind == K::Star) return Dyadic::zero();
      if (a.kind == K::Star) return Dyadic::inv_pow2(scale + b.value);
      if (b.kind == K::Star) return Dyadic::inv_pow2(scale + a.value);
      if (a.value != b.value) return Dyadic::inv_pow2(scale + std::min(a.value, b.value));
      return dist(piece_view(n, a.value), x, y, pos + 1, scale + a.value + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (a == b) return Dyadic::zero();
      // side: +1 for positive integers and +inf, -1 for negatives and -inf, 0 for 0
      auto side = [](const PathStep& s) -> int {
        if (s.kind == K::PlusInf) return 1;
        if (s.kind == K::MinusInf) return -1;
        return (s.value > 0) - (s.value < 0);
      };
      auto level = [](const PathStep& s) -> std::optional<i64> {
        if (s.kind != K::Int) return std::nullopt;
        return s.value < 0 ? -s.value : s.value;
      };
      const int sa = side(a), sb = side(b);
      if (sa == 0 || sb == 0 || sa != sb) return Dyadic::inv_pow2(scale);
      const auto la = level(a), lb = level(b);
      const i64 lvl = !la ? *lb : !lb ? *la : std::min(*la, *lb);
      return Dyadic::inv_pow2(scale + lvl);
    } else {
      if (a == b) return Dyadic::zero();
      if (a.kind == K::Inf) return Dyadic::inv_pow2(scale + b.value);
      if (b.kind == K::Inf) return Dyadic::inv_pow2(scale + a.value);
      return Dyadic::inv_pow2(scale + std::min(a.value, b.value));
    }
  });
}

inline Dyadic distance_unchecked(const CascadeExpr& e, const PointId& x, const PointId& y) {
  return dist(view(e), x, y, 0, 0);
}

inline i64 max_rank(View v);

inline i64 star_rank(const TowerNode& t) {
  if (std::holds_alternative<Family>(t.tail)) return 1;
  return 1 + max_rank(view(std::get<CascadeExpr>(t.tail)));
}

inline i64 max_rank(View v) {
  return dispatch(v, [&](const auto& n) -> i64 {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      return 0;
    } else if constexpr (std::is_same_v<T, SumNode>) {
      return std::max(max_rank(view(n.left)), max_rank(view(n.right)));
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      return max_rank(view(n.base));
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      i64 r = star_rank(n);
      for (const auto& h : n.head) r = std::max(r, max_rank(view(h)));
      return r;
    } else {
      return 1;
    }
  });
}

inline i64 point_rank(View v, const PointId& x, std::size_t pos) {
  using K = PathStep::Kind;
  return dispatch(v, [&](const auto& n) -> i64 {
    using T = std::decay_t<decltype(n)>;
    const PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      return 0;
    } else if constexpr (std::is_same_v<T, SumNode>) {
      return point_rank(view(s.kind == K::Left ? n.left : n.right), x, pos + 1);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      return point_rank(view(n.base), x, pos + 1);
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Star) return star_rank(n);
      return point_rank(piece_view(n, s.value), x, pos + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      return s.kind == K::Int ? 0 : 1;
    } else {
      return s.kind == K::Index ? 0 : 1;
    }
  });
}

}  // namespace detail

inline void validate_point(const CascadeExpr& expr, const PointId& x) {
  detail::validate(detail::view(expr), x, 0);
}

/// All points whose infinite-family indices are at most `depth`, limit points
/// included. Towers always list their head pieces and at least one tail piece.
inline std::vector<PointId> enumerate_points(const CascadeExpr& expr, i64 depth) {
  std::vector<PointId> out;
  PointId prefix;
  detail::enumerate(detail::view(expr), std::max<i64>(depth, 0), prefix, out);
  return out;
}

inline PointId apply_map(const CascadeExpr& expr, PointId x) {
  validate_point(expr, x);
  detail::forward(detail::view(expr), x, 0);
  return x;
}

inline PointId apply_inverse(const CascadeExpr& expr, PointId x) {
  validate_point(expr, x);
  detail::backward(detail::view(expr), x, 0);
  return x;
}

/// f^m(x) for any integer m, computed in closed form.
inline PointId apply_power(const CascadeExpr& expr, PointId x, i64 m) {
  validate_point(expr, x);
  detail::power(detail::view(expr), x, 0, m);
  return x;
}

inline Dyadic distance(const CascadeExpr& expr, const PointId& x, const PointId& y) {
  validate_point(expr, x);
  validate_point(expr, y);
  return detail::dist(detail::view(expr), x, y, 0, 0);
}

inline i64 cb_rank_point(const CascadeExpr& expr, const PointId& x) {
  validate_point(expr, x);
  return detail::point_rank(detail::view(expr), x, 0);
}

inline i64 max_cb_rank(const CascadeExpr& expr) { return detail::max_rank(detail::view(expr)); }

/// Least alpha with an empty alpha-th derived set: the maximal point rank plus one.
inline i64 cb_rank_space(const CascadeExpr& expr) { return max_cb_rank(expr) + 1; }

/// Parses a point address against `expr`. Steps are separated by '.'.
inline PointId parse_point(const CascadeExpr& expr, std::string_view text) {
  using K = PathStep::Kind;
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = text.find('.', start);
    parts.push_back(text.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  auto fail = [&](const std::string& why) -> PathStep {
    throw InvalidPoint("invalid point '" + std::string(text) + "': " + why);
  };
  auto nat = [&](std::string_view s) -> i64 {
    auto v = detail::parse_i64(s);
    if (!v) fail("expected a natural number, got '" + std::string(s) + "'");
    return *v;
  };
  auto integer = [&](std::string_view s) -> i64 {
    if (s.starts_with('-')) return -nat(s.substr(1));
    if (s.starts_with('+')) return nat(s.substr(1));
    return nat(s);
  };

  PointId p;
  detail::View v = detail::view(expr);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string_view part = parts[i];
    std::optional<detail::View> next;
    const PathStep step = detail::dispatch(v, [&](const auto& n) -> PathStep {
      using T = std::decay_t<decltype(n)>;
      if constexpr (std::is_same_v<T, CycleNode>) {
        return {K::Pos, nat(part)};
      } else if constexpr (std::is_same_v<T, SumNode>) {
        if (part == "L") {
          next = detail::view(n.left);
          return {K::Left};
        }
        if (part == "R") {
          next = detail::view(n.right);
          return {K::Right};
        }
        return fail("expected L or R");
      } else if constexpr (std::is_same_v<T, CycleOfNode>) {
        if (!part.starts_with('c')) return fail("expected copy index c<j>");
        next = detail::view(n.base);
        return {K::Copy, nat(part.substr(1))};
      } else if constexpr (std::is_same_v<T, TowerNode>) {
        if (part == "*") return {K::Star};
        if (!part.starts_with('p')) return fail("expected piece p<i> or *");
        const i64 idx = nat(part.substr(1));
        next = detail::piece_view(n, idx);
        return {K::Piece, idx};
      } else if constexpr (std::is_same_v<T, Shift2Node>) {
        if (part == "+inf") return {K::PlusInf};
        if (part == "-inf") return {K::MinusInf};
        return {K::Int, integer(part)};
      } else {
        if (part == "inf") return {K::Inf};
        if (!part.starts_with('x')) return fail("expected x<n> or inf");
        return {K::Index, nat(part.substr(1))};
      }
    });
    p.steps.push_back(step);
    if (next) {
      v = *next;
    } else if (i + 1 != parts.size()) {
      fail("address too long");
    }
  }
  validate_point(expr, p);
  return p;
}

}  // namespace cascade
