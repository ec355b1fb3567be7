#include <gtest/gtest.h>

#include <random>

#include "cascade/ellis.hpp"
#include "cascade/oracle.hpp"
#include "support/generators.hpp"

using namespace cascade;

namespace {

EllisElement fwd(const char* residues) {
  return EllisElement::limit(Side::Forward, ResidueSystem::parse(residues));
}

PointId pt(const CascadeExpr& e, const char* text) { return parse_point(e, text); }

}  // namespace

TEST(ElementParse, Forms) {
  EXPECT_EQ(EllisElement::parse("id"), EllisElement::principal(0));
  EXPECT_EQ(EllisElement::parse("f"), EllisElement::principal(1));
  EXPECT_EQ(EllisElement::parse("f^-3"), EllisElement::principal(-3));
  EXPECT_EQ(EllisElement::parse("f^+").side(), Side::Forward);
  EXPECT_EQ(EllisElement::parse("f^-").side(), Side::Backward);
  EXPECT_EQ(EllisElement::parse("fwd(2:1, 3:2)").to_string(), "fwd(2:1,3:2)");
  EXPECT_EQ(EllisElement::parse("bwd(2^n:1)").to_string(), "bwd(2^n:1)");
  EXPECT_THROW(EllisElement::parse("g"), ParseError);
  EXPECT_THROW(EllisElement::parse("f^x"), ParseError);
  EXPECT_THROW(check_element(fwd("4:3,16:9")), InvalidElement);
}

TEST(Evaluate, LemmaExamples) {
  const CascadeExpr c3 = parse_cascade("cycle(3)");
  EXPECT_EQ(evaluate(fwd("3:2"), pt(c3, "0"), c3), pt(c3, "2"));

  const CascadeExpr s = CascadeExpr::shift2();
  const auto plus = EllisElement::parse("f^+");
  const auto minus = EllisElement::parse("f^-");
  EXPECT_EQ(evaluate(plus, pt(s, "-inf"), s), pt(s, "-inf"));
  EXPECT_EQ(evaluate(plus, pt(s, "-5"), s), pt(s, "+inf"));
  EXPECT_EQ(evaluate(plus, pt(s, "+inf"), s), pt(s, "+inf"));
  EXPECT_EQ(evaluate(minus, pt(s, "5"), s), pt(s, "-inf"));
  EXPECT_EQ(evaluate(minus, pt(s, "+inf"), s), pt(s, "+inf"));

  const CascadeExpr t = parse_cascade("tower(cycle(1*n+1))");
  const auto km1 = fwd("1*n+1:1*n+1-1");
  EXPECT_EQ(evaluate(km1, pt(t, "p2.0"), t), pt(t, "p2.2"));
  EXPECT_EQ(evaluate(km1, pt(t, "*"), t), pt(t, "*"));

  const CascadeExpr i = CascadeExpr::ishift();
  for (const char* x : {"x0", "x7", "inf"}) EXPECT_EQ(evaluate(EllisElement::parse("inf"), pt(i, x), i), pt(i, "inf"));
}

TEST(Evaluate, Underdetermined) {
  const CascadeExpr e = parse_cascade("sum(cycle(2), cycle(3))");
  EXPECT_THROW(evaluate(fwd("2:1"), pt(e, "R.0"), e), UnderdeterminedResidue);
  EXPECT_NO_THROW(evaluate(fwd("2:1"), pt(e, "L.0"), e));
}

TEST(Compose, Examples) {
  const CascadeExpr e = parse_cascade("sum(cycle(2), cycle(3))");
  EXPECT_EQ(compose(EllisElement::principal(2), EllisElement::principal(3), e), EllisElement::principal(5));
  const auto id = compose(fwd("2:1,3:2"), fwd("2:1,3:1"), e);
  EXPECT_EQ(id.residues().determine(2), 0);
  EXPECT_EQ(id.residues().determine(3), 0);
  for (const auto& x : enumerate_points(e, 0)) EXPECT_EQ(evaluate(id, x, e), x);
}

TEST(Compose, ShiftTwoSequencesTables) {
  const CascadeExpr s = CascadeExpr::shift2();
  const auto plus = EllisElement::parse("f^+");
  const auto minus = EllisElement::parse("f^-");
  const auto pm = compose(plus, minus, s);
  const auto mp = compose(minus, plus, s);
  EXPECT_TRUE(equivalent(pm, minus, s));
  EXPECT_TRUE(equivalent(mp, plus, s));
  EXPECT_FALSE(equivalent(pm, mp, s));
  EXPECT_TRUE(equivalent(compose(plus, plus, s), plus, s));
  EXPECT_TRUE(equivalent(compose(EllisElement::principal(4), plus, s), plus, s));
  EXPECT_TRUE(equivalent(compose(plus, EllisElement::principal(-4), s), plus, s));
}

TEST(Inverse, Examples) {
  const CascadeExpr e = parse_cascade("sum(cycle(2), cycle(3))");
  EXPECT_EQ(inverse(EllisElement::principal(3), e), EllisElement::principal(-3));
  const auto inv = inverse(fwd("2:1,3:2"), e);
  EXPECT_EQ(inv.side(), Side::Backward);
  EXPECT_EQ(inv.residues().to_string(), "2:1,3:1");
  EXPECT_THROW(inverse(EllisElement::parse("f^+"), CascadeExpr::shift2()), NoInverse);
  EXPECT_THROW(inverse(EllisElement::parse("inf"), CascadeExpr::ishift()), NoInverse);
  EXPECT_NO_THROW(inverse(EllisElement::principal(1), CascadeExpr::shift2()));
}

TEST(Homomorphism, RandomElementsComposePointwise) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 40; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {2, false, true});
    const auto pts = enumerate_points(e, 4);
    for (int j = 0; j < 5; ++j) {
      const auto g = gen::random_element(rng, e);
      const auto h = gen::random_element(rng, e);
      const auto gh = compose(g, h, e);
      const auto hg = compose(h, g, e);
      for (const auto& x : pts) {
        EXPECT_EQ(evaluate(gh, x, e), evaluate(g, evaluate(h, x, e), e));
        EXPECT_EQ(evaluate(gh, x, e), evaluate(hg, x, e));
      }
    }
  }
}

TEST(Homomorphism, InjectiveAtTruncation) {
  // Distinct residue tuples over the truncated period set act differently.
  const CascadeExpr e = parse_cascade("tower(cycle(2), cycle(3^n))");
  const auto pts = enumerate_points(e, 3);
  std::vector<i64> periods{1, 2, 3, 9, 27};
  std::map<std::vector<PointId>, std::vector<i64>> seen;
  for (i64 a = 0; a < 54; ++a) {
    ResidueSystem rs;
    for (i64 q : periods) rs.set(q, a % q);
    const auto el = EllisElement::limit(Side::Forward, rs);
    std::vector<PointId> images;
    for (const auto& x : pts) images.push_back(evaluate(el, x, e));
    std::vector<i64> key;
    for (i64 q : periods) key.push_back(a % q);
    auto [it, fresh] = seen.emplace(images, key);
    if (!fresh) EXPECT_EQ(it->second, key);
  }
  EXPECT_EQ(seen.size(), 54u);
}

TEST(Idempotent, ZeroResiduesActAsIdentity) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 30; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {2, false, true});
    const auto z = EllisElement::limit(Side::Forward, ResidueSystem::constant(0));
    EXPECT_TRUE(equivalent(compose(z, z, e), z, e));
    for (const auto& x : enumerate_points(e, 4)) EXPECT_EQ(evaluate(z, x, e), x);
  }
}

TEST(Soundness, LimitElementsMatchOracle) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 25; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {2, false, false});
    const auto pts = enumerate_points(e, 3);
    i64 l = 1;
    for (const auto& x : pts) l = checked_lcm(l, *period(e, x).value);
    if (l > 500) continue;
    const auto g = gen::random_element(rng, e);
    std::vector<std::pair<i64, i64>> classes;
    for (i64 q = 1; q <= l; ++q)
      if (l % q == 0) classes.emplace_back(q, *g.action().determine(q) % q);
    const auto dir = g.side() == Side::Forward ? oracle::Direction::Forward : oracle::Direction::Backward;
    if (dir == oracle::Direction::Backward)
      for (auto& [q, r] : classes) r = floor_mod(-r, q);
    for (const auto& x : pts) {
      const auto res = oracle::p_iterate_limit(e, x, oracle::CongruenceClassSpec::of(classes), 4 * l, dir);
      ASSERT_TRUE(res.stabilized);
      EXPECT_EQ(res.value, evaluate(g, x, e)) << to_string(e) << " " << g.to_string();
    }
  }
}

TEST(EnEz, Examples) {
  const auto r = en_equals_ez(parse_cascade("sum(cycle(2), cycle(3))"));
  ASSERT_TRUE(r.equal);
  EXPECT_EQ(r.witness->residues().to_string(), "2:1,3:2");
  const auto one = en_equals_ez(parse_cascade("cycle(1)"));
  ASSERT_TRUE(one.equal);
  EXPECT_TRUE(equivalent(*one.witness, EllisElement::principal(0), parse_cascade("cycle(1)")));
  const auto s = en_equals_ez(CascadeExpr::shift2());
  EXPECT_FALSE(s.equal);
  EXPECT_EQ(to_string(*s.aperiodic), "0");
}

TEST(SemigroupTable, CyclicForDistal) {
  const auto t = truncated_semigroup(parse_cascade("sum(cycle(2), cycle(3))"), 4);
  EXPECT_TRUE(t.distal);
  EXPECT_EQ(t.labels.size(), 6u);
  EXPECT_TRUE(t.commutative);
  EXPECT_TRUE(t.associative());
  const auto tower = truncated_semigroup(parse_cascade("tower(cycle(2^n))"), 3);
  EXPECT_EQ(tower.labels.size(), 8u);
}

TEST(SemigroupTable, ShiftTwoSequences) {
  const auto t = truncated_semigroup(CascadeExpr::shift2(), 2);
  EXPECT_EQ(t.labels, (std::vector<std::string>{"f^-2", "f^-1", "id", "f", "f^2", "f^+", "f^-"}));
  EXPECT_FALSE(t.commutative);
  EXPECT_TRUE(t.associative());
  EXPECT_FALSE(t.continuous[*t.index_of("f^+")]);
  EXPECT_FALSE(t.continuous[*t.index_of("f^-")]);
  EXPECT_EQ(t.table[*t.index_of("f^+")][*t.index_of("f^-")], t.index_of("f^-"));
  EXPECT_EQ(t.table[*t.index_of("f^-")][*t.index_of("f^+")], t.index_of("f^+"));
  EXPECT_EQ(t.to_string(),
            "o    f^-2 f^-1 id   f    f^2  f^+  f^-\n"
            "f^-2 ?    ?    f^-2 f^-1 id   f^+  f^-\n"
            "f^-1 ?    f^-2 f^-1 id   f    f^+  f^-\n"
            "id   f^-2 f^-1 id   f    f^2  f^+  f^-\n"
            "f    f^-1 id   f    f^2  ?    f^+  f^-\n"
            "f^2  id   f    f^2  ?    ?    f^+  f^-\n"
            "f^+  f^+  f^+  f^+  f^+  f^+  f^+  f^-\n"
            "f^-  f^-  f^-  f^-  f^-  f^-  f^+  f^-\n");
}

TEST(SemigroupTable, InterleavedShift) {
  const auto t = truncated_semigroup(CascadeExpr::ishift(), 1);
  EXPECT_EQ(t.labels, (std::vector<std::string>{"f^-1", "id", "f", "inf"}));
  EXPECT_TRUE(t.commutative);
  for (bool c : t.continuous) EXPECT_TRUE(c);
}

TEST(SemigroupTable, CycleOfShiftHasResidueClasses) {
  const auto t = truncated_semigroup(parse_cascade("cycleof(shift2, 2)"), 1);
  EXPECT_TRUE(t.index_of("f^+[1]"));
  EXPECT_TRUE(t.index_of("f^-[0]"));
  EXPECT_TRUE(t.associative());
}

TEST(Wap, Verdicts) {
  EXPECT_TRUE(is_wap(parse_cascade("tower(cycle(2))")).wap);
  EXPECT_TRUE(is_wap(CascadeExpr::ishift()).wap);
  const auto w = is_wap(CascadeExpr::shift2());
  EXPECT_FALSE(w.wap);
  EXPECT_EQ(to_string(w.limit), "-inf");
  EXPECT_EQ(to_string(w.limit_image), "-inf");
  for (const auto& y : w.images) EXPECT_EQ(to_string(y), "+inf");
  EXPECT_EQ(w.mismatch, Dyadic::one());
}

TEST(Abelian, Verdicts) {
  EXPECT_TRUE(is_abelian_truncated(parse_cascade("sum(cycle(2), cycle(3))"), 4).abelian);
  EXPECT_TRUE(is_abelian_truncated(CascadeExpr::ishift(), 3).abelian);
  const auto s = is_abelian_truncated(CascadeExpr::shift2(), 2);
  EXPECT_FALSE(s.abelian);
  EXPECT_EQ(*s.witness, (std::pair<std::string, std::string>{"f^+", "f^-"}));
}

TEST(Torsion, TruncatedInvolutionsDoNotCohere) {
  // Period set {2^n}: at depth d the table is cyclic of order 2^d with a
  // single involution. The involution at depth d + 1 reduces to the identity
  // at depth d, so no sequence of involutions is compatible across depths.
  const CascadeExpr e = parse_cascade("tower(cycle(2^n))");
  std::optional<i64> previous;
  for (i64 d = 1; d <= 9; ++d) {
    const auto t = truncated_semigroup(e, d);
    ASSERT_EQ(t.period_lcm, i64{1} << d);
    const std::size_t id = *t.index_of("id");
    std::vector<i64> involutions;
    for (std::size_t a = 0; a < t.labels.size(); ++a)
      if (a != id && t.table[a][a] == id) involutions.push_back(t.elements[a].exponent());
    ASSERT_EQ(involutions.size(), 1u);
    EXPECT_EQ(involutions[0], i64{1} << (d - 1));
    if (previous) EXPECT_NE(floor_mod(involutions[0], i64{1} << (d - 1)), *previous);
    previous = involutions[0];
  }
}
