#pragma once

// The six-way classification: equicontinuous, distal, some f^p a
// homeomorphism, a uniform return bound, E(N) = E(Z), and every point
// periodic. Each verdict is reached by its own route so that agreement is a
// real check.

#include <set>
#include <sstream>
#include <string>

#include "cascade/ellis.hpp"
#include "cascade/equicont.hpp"

namespace cascade {

struct ClassifyOptions {
  i64 depth = 8;
  i64 iter_bound = 256;
};

struct NonInjectiveWitness {
  EllisElement element;
  std::string label;
  PointId a;
  PointId b;
  PointId image;
};

struct Classification {
  bool all_periodic = false;
  bool equicontinuous = false;
  bool distal = false;
  bool fp_homeo_exists = false;
  bool uniform_bound_exists = false;
  bool en_eq_ez = false;

  std::optional<PointId> aperiodic_point;
  std::optional<NonInjectiveWitness> noninjective;
  std::optional<FailureWitness> equicont_failure;
  Dyadic witness_epsilon;
  ClassifyOptions options;

  bool consistent() const {
    return equicontinuous == all_periodic && distal == all_periodic &&
           fp_homeo_exists == all_periodic && uniform_bound_exists == all_periodic &&
           en_eq_ez == all_periodic;
  }

  /// Flat key: value report.
  std::string report() const {
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "all_periodic: " << b(all_periodic) << '\n'
       << "equicontinuous: " << b(equicontinuous) << '\n'
       << "distal: " << b(distal) << '\n'
       << "fp_homeo_exists: " << b(fp_homeo_exists) << '\n'
       << "uniform_bound_exists: " << b(uniform_bound_exists) << '\n'
       << "en_eq_ez: " << b(en_eq_ez) << '\n';
    if (aperiodic_point) os << "witness_aperiodic_point: " << to_string(*aperiodic_point) << '\n';
    if (noninjective) {
      os << "witness_noninjective_element: " << noninjective->label << " = "
         << noninjective->element.to_string() << '\n'
         << "witness_noninjective_pair: (" << to_string(noninjective->a) << ", "
         << to_string(noninjective->b) << ")\n"
         << "witness_noninjective_image: " << to_string(noninjective->image) << '\n';
    }
    if (equicont_failure) {
      const auto& w = *equicont_failure;
      os << "witness_equicont_failure: (" << to_string(w.x) << ", " << to_string(w.y) << ", "
         << w.n << ")\n"
         << "witness_equicont_distances: " << w.initial.to_string() << " -> "
         << w.final.to_string() << '\n'
         << "witness_epsilon: " << witness_epsilon.to_string() << '\n';
    }
    os << "search_depth: " << options.depth << '\n'
       << "search_iter_bound: " << options.iter_bound << '\n';
    return os.str();
  }
};

namespace detail {

// Images of the enumerated points; injective iff no two coincide.
inline std::optional<std::pair<PointId, PointId>> collision(const EllisElement& e,
                                                            const CascadeExpr& expr, i64 depth) {
  std::map<PointId, PointId> seen;
  for (const auto& x : enumerate_points(expr, depth)) {
    auto [it, inserted] = seen.emplace(evaluate(e, x, expr), x);
    if (!inserted) return std::pair{it->second, x};
  }
  return std::nullopt;
}

inline bool homeomorphism_at_truncation(const EllisElement& e, const CascadeExpr& expr, i64 depth) {
  if (collision(e, expr, depth)) return false;
  const auto pts = enumerate_points(expr, depth);
  const std::set<PointId> dom(pts.begin(), pts.end());
  for (const auto& x : pts)
    if (!dom.count(evaluate(e, x, expr))) return false;
  return !continuity_failure(e, expr, depth);
}

}  // namespace detail

inline Classification classify(const CascadeExpr& expr, ClassifyOptions opts = {}) {
  Classification c;
  c.options = opts;
  const i64 depth = opts.depth;

  // Every point periodic: read off the grammar.
  c.all_periodic = is_all_periodic(expr);

  // Distal: look for a limit element that merges two points.
  const auto site = first_catalog_site(expr);
  if (site) {
    NonInjectiveWitness w{EllisElement::limit(Side::Forward, ResidueSystem::constant(0)), "", {}, {},
                          {}};
    if (site->kind == CatalogSite::Kind::Shift2) {
      w.label = "f^+";
      w.a = site->at({PathStep::Kind::Int, 0});
      w.b = site->at({PathStep::Kind::Int, 5});
    } else {
      w.label = "inf";
      w.a = site->at({PathStep::Kind::Index, 0});
      w.b = site->at({PathStep::Kind::Index, 1});
    }
    w.image = evaluate(w.element, w.a, expr);
    if (evaluate(w.element, w.b, expr) != w.image || w.a == w.b)
      throw std::logic_error("non-injectivity witness does not verify");
    c.noninjective = w;
    c.distal = false;
  } else {
    c.distal = !detail::collision(EllisElement::limit(Side::Forward, ResidueSystem::constant(1)),
                                  expr, std::min<i64>(depth, 6));
  }

  // Some f^p a homeomorphism: residues 0 give the identity on periodic points.
  {
    bool any = false;
    for (Side s : {Side::Forward, Side::Backward}) {
      const auto e = EllisElement::limit(s, ResidueSystem::constant(0));
      if (detail::homeomorphism_at_truncation(e, expr, std::min<i64>(depth, 6))) any = true;
    }
    c.fp_homeo_exists = any;
  }

  // Uniform return bound: construct l(eps) and verify it, or exhibit a point
  // that never returns close to itself.
  if (auto x = aperiodic_point(expr)) {
    c.aperiodic_point = x;
    const Dyadic eps = Dyadic::inv_pow2(site->scale);
    for (i64 n = 1; n <= opts.iter_bound; ++n)
      if (distance(expr, *x, apply_power(expr, *x, n)) < eps)
        throw std::logic_error("aperiodic witness returns close to itself");
    c.uniform_bound_exists = false;
  } else {
    bool ok = true;
    for (i64 k = 1; k <= 3 && ok; ++k) {
      const auto ub = uniform_period_bound(expr, Dyadic::inv_pow2(k));
      ok = !check_uniform_bound(expr, ub, std::min<i64>(depth, 6), 16);
    }
    c.uniform_bound_exists = ok;
  }

  // E(N) = E(Z).
  c.en_eq_ez = en_equals_ez(expr).equal;

  // Equicontinuity: bounded search for two close points pushed apart.
  c.witness_epsilon = site ? Dyadic::inv_pow2(site->scale + 1) : Dyadic::inv_pow2(1);
  c.equicont_failure = equicontinuity_failure_witness(expr, c.witness_epsilon, depth, opts.iter_bound);
  c.equicontinuous = !c.equicont_failure;

  if (!c.consistent()) throw std::logic_error("classification verdicts disagree for " + to_string(expr));
  return c;
}

}  // namespace cascade
