#pragma once

// Command-line front end. run_command is the whole program; the executable
// only forwards argv and the standard streams.

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/classify.hpp"
#include "cascade/disk.hpp"
#include "cascade/oracle.hpp"

namespace cascade::cli {

inline constexpr const char* kGrammar =
    "expression grammar:\n"
    "  expr    := cycle(nat) | tower(pieces) | sum(expr, expr)\n"
    "           | cycleof(expr, nat) | shift2 | ishift\n"
    "  pieces  := (expr ,)* family\n"
    "  family  := cycle(formula) | rep(expr)\n"
    "  formula := nat | nat*n+nat | nat^n | nat*nat^n\n"
    "points: steps joined by '.', e.g. L.p2.0, c1.-inf, x5\n"
    "elements: id, f, f^k, f^+, f^-, inf, fwd(residues), bwd(residues)\n"
    "residues: n:r pairs, e.g. 4:3,16:9; rules such as 2^n:2^n-1 or n:0\n";

namespace detail {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::vector<std::pair<i64, i64>> parse_classes(const std::string& text) {
  const ResidueSystem rs = ResidueSystem::parse(text);
  if (!rs.rules().empty()) throw Usage("congruence lists take explicit n:r pairs only");
  return {rs.explicit_constraints().begin(), rs.explicit_constraints().end()};
}

// Left-justifies by code points, so that "·" counts as one column.
inline std::string pad(const std::string& s, std::size_t width) {
  std::size_t cols = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cols;
  return s + std::string(cols < width ? width - cols : 1, ' ');
}

inline void print_points(std::ostream& out, const std::vector<PointId>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << to_string(pts[i]);
  out << '\n';
}

}  // namespace detail

namespace detail {

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ellis semigroups and classification of cascades on countable compact spaces",
               "cascade"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.footer(kGrammar);

  std::string expr_text, file, eps_text, elem_a, elem_b, point_text, residues_text;
  i64 depth = 8, iter_bound = 64, k = 0, m_max = 64, bound = 8;
  bool backward = false;

  auto with_expr = [&](CLI::App* c) {
    c->add_option("expr", expr_text, "cascade expression");
    c->add_option("--file", file, "read the expression from a file");
    c->add_option("--depth", depth, "truncation depth")->check(CLI::Range(i64{0}, i64{64}));
    c->add_option("--iter-bound", iter_bound, "iterate bound")->check(CLI::Range(i64{1}, i64{1} << 20));
    return c;
  };

  auto* classify_cmd = with_expr(app.add_subcommand("classify", "six-way classification"));
  auto* periods_cmd = with_expr(app.add_subcommand("periods", "period set, ranks and minimal sets"));
  auto* ellis_cmd = with_expr(app.add_subcommand("ellis", "truncated Ellis semigroup table"));
  auto* compose_cmd = with_expr(app.add_subcommand("compose", "compose two elements (g o h)"));
  compose_cmd->add_option("--g", elem_a, "outer element")->required();
  compose_cmd->add_option("--h", elem_b, "inner element")->required();
  auto* inverse_cmd = with_expr(app.add_subcommand("inverse", "inverse of an element"));
  inverse_cmd->add_option("--e", elem_a, "element")->required();
  auto* evaluate_cmd = with_expr(app.add_subcommand("evaluate", "evaluate an element at a point"));
  evaluate_cmd->add_option("--e", elem_a, "element")->required();
  evaluate_cmd->add_option("--point", point_text, "point address")->required();
  auto* realizable_cmd = app.add_subcommand("realizable", "decide realizability of residues");
  realizable_cmd->add_option("residues", residues_text, "residue system")->required();
  auto* eneqez_cmd = with_expr(app.add_subcommand("en-eq-ez", "decide E(N) = E(Z)"));
  auto* wap_cmd = with_expr(app.add_subcommand("wap", "decide weak almost periodicity"));
  auto* equicont_cmd = with_expr(app.add_subcommand("equicont", "uniform bound l and modulus delta"));
  equicont_cmd->add_option("--eps", eps_text, "epsilon, e.g. 1/2^3")->required();
  auto* witness_cmd = with_expr(app.add_subcommand("witness", "search for an equicontinuity failure"));
  witness_cmd->add_option("--eps", eps_text, "epsilon, e.g. 1/2")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force oracle");
  oracle_cmd->require_subcommand(1);
  auto* piter_cmd = with_expr(oracle_cmd->add_subcommand("piter", "p-iterate by sampling"));
  piter_cmd->add_option("--point", point_text, "point address")->required();
  piter_cmd->add_option("--classes", residues_text, "congruence classes n:r,...")->required();
  piter_cmd->add_option("--m-max", m_max, "largest sampled exponent")->check(CLI::Range(i64{1}, i64{1} << 20));
  piter_cmd->add_flag("--backward", backward, "iterate the inverse map");
  auto* closure_cmd = with_expr(oracle_cmd->add_subcommand("closure", "pointwise closure tables"));
  closure_cmd->add_option("--bound", bound, "power bound")->check(CLI::Range(i64{0}, i64{4096}));
  auto* crt_cmd = oracle_cmd->add_subcommand("crt", "solve congruences by scanning");
  crt_cmd->add_option("congruences", residues_text, "n:r,...")->required();

  auto* disk_cmd = app.add_subcommand("disk", "disk rotation demo");
  disk_cmd->require_subcommand(1);
  auto* nonwap_cmd = disk_cmd->add_subcommand("nonwap", "discontinuous limit element");
  nonwap_cmd->add_option("--k", k, "number of primes")->required()->check(CLI::Range(i64{0}, i64{1000}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << kGrammar;
    return 2;
  }

  auto expression = [&]() -> CascadeExpr {
    if (!file.empty() && !expr_text.empty())
      throw detail::Usage("give the expression either inline or with --file, not both");
    if (file.empty() && expr_text.empty()) throw detail::Usage("missing expression");
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw detail::Usage("cannot read " + file);
      std::stringstream ss;
      ss << in.rdbuf();
      return parse_cascade(ss.str());
    }
    return parse_cascade(expr_text);
  };

  try {
    if (*classify_cmd) {
      out << classify(expression(), {depth, iter_bound}).report();
    } else if (*periods_cmd) {
      const CascadeExpr e = expression();
      const PeriodSetSpec ps = period_set(e);
      out << "period_set: " << ps.to_string() << '\n';
      out << "all_periodic: " << (is_all_periodic(e) ? "true" : "false") << '\n';
      out << "cb_rank: " << cb_rank_space(e) << '\n';
      out << "max_rank_set: ";
      detail::print_points(out, max_rank_set(e));
      out << "minimal_sets:\n";
      for (const auto& fam : minimal_sets(e)) out << "  " << fam.to_string() << '\n';
    } else if (*ellis_cmd) {
      const CascadeExpr e = expression();
      const SemigroupTable t = truncated_semigroup(e, depth);
      out << "distal: " << (t.distal ? "true" : "false") << '\n';
      out << "elements: " << t.labels.size() << '\n';
      out << "period_lcm: " << t.period_lcm << '\n';
      if (!t.distal) out << "power_bound: " << t.bound << '\n';
      out << "commutative: " << (t.commutative ? "true" : "false") << '\n';
      out << "associative: " << (t.associative() ? "true" : "false") << '\n';
      out << "table:\n" << t.to_string();
      out << "elements_detail:\n";
      for (std::size_t i = 0; i < t.labels.size(); ++i)
        out << "  " << t.labels[i] << " = " << t.elements[i].to_string() << ' '
            << (t.continuous[i] ? "continuous" : "discontinuous") << '\n';
    } else if (*compose_cmd) {
      const CascadeExpr e = expression();
      const EllisElement r = compose(EllisElement::parse(elem_a), EllisElement::parse(elem_b), e);
      out << "result: " << r.to_string() << '\n';
    } else if (*inverse_cmd) {
      const CascadeExpr e = expression();
      const EllisElement r = inverse(EllisElement::parse(elem_a), e);
      out << "result: " << r.to_string() << '\n';
    } else if (*evaluate_cmd) {
      const CascadeExpr e = expression();
      const EllisElement el = EllisElement::parse(elem_a);
      check_element(el);
      const PointId r = evaluate(el, parse_point(e, point_text), e);
      out << "result: " << to_string(r) << '\n';
    } else if (*realizable_cmd) {
      const auto r = realizable(ResidueSystem::parse(residues_text));
      if (r.realizable) {
        out << "realizable: yes\n";
        if (r.witness) out << "witness: " << *r.witness << '\n';
      } else {
        out << "realizable: no\n";
        out << "incompatible at (" << r.conflict->first << "," << r.conflict->second << ")\n";
      }
    } else if (*eneqez_cmd) {
      const auto r = en_equals_ez(expression());
      out << "en_eq_ez: " << (r.equal ? "equal" : "not equal") << '\n';
      if (r.witness) out << "witness_element: " << r.witness->to_string() << '\n';
      if (r.aperiodic) out << "witness_aperiodic_point: " << to_string(*r.aperiodic) << '\n';
    } else if (*wap_cmd) {
      const auto r = is_wap(expression(), depth);
      out << "wap: " << (r.wap ? "true" : "false") << '\n';
      if (!r.wap) {
        out << "witness_element: " << r.element->to_string() << '\n';
        out << "witness_sequence: ";
        detail::print_points(out, r.sequence);
        out << "witness_images: ";
        detail::print_points(out, r.images);
        out << "witness_limit: " << to_string(r.limit) << " -> " << to_string(r.limit_image) << '\n';
        out << "witness_mismatch: " << r.mismatch.to_string() << '\n';
      }
      out << "checked_depth: " << r.checked_depth << '\n';
    } else if (*equicont_cmd) {
      const CascadeExpr e = expression();
      const Dyadic eps = parse_dyadic(eps_text);
      const UniformBound ub = uniform_period_bound(e, eps);
      const Modulus mod = equicontinuity_modulus(e, eps, depth);
      out << "epsilon: " << eps.to_string() << '\n';
      out << "l: " << ub.l << '\n';
      out << "covering_balls: " << ub.covering.size() << '\n';
      out << "delta: " << mod.delta.to_string() << '\n';
      out << "delta_third: " << mod.third.to_string() << '\n';
      out << "l_third: " << mod.l << '\n';
      out << "sharp_delta: " << mod.sharp_delta.to_string() << '\n';
      const bool ub_ok = !check_uniform_bound(e, ub, depth, iter_bound);
      const bool mod_ok = !check_modulus(e, mod.delta, eps, depth, iter_bound);
      out << "verified_uniform_bound: " << (ub_ok ? "true" : "false") << '\n';
      out << "verified_modulus: " << (mod_ok ? "true" : "false") << '\n';
      out << "verification_depth: " << depth << '\n';
      out << "verification_iterates: " << iter_bound << '\n';
    } else if (*witness_cmd) {
      const CascadeExpr e = expression();
      const Dyadic eps = parse_dyadic(eps_text);
      const auto w = equicontinuity_failure_witness(e, eps, depth, iter_bound);
      if (w) {
        out << "witness: (" << to_string(w->x) << ", " << to_string(w->y) << ", " << w->n << ")\n";
        out << "distance_before: " << w->initial.to_string() << '\n';
        out << "distance_after: " << w->final.to_string() << '\n';
      } else {
        out << "witness: none\n";
      }
      out << "search_depth: " << depth << '\n';
      out << "search_iter_bound: " << iter_bound << '\n';
    } else if (*piter_cmd) {
      const CascadeExpr e = expression();
      const auto spec = oracle::CongruenceClassSpec::of(detail::parse_classes(residues_text));
      const auto r = oracle::p_iterate_limit(e, parse_point(e, point_text), spec, m_max,
                                             backward ? oracle::Direction::Backward
                                                      : oracle::Direction::Forward);
      out << "stabilized: " << detail::yes_no(r.stabilized) << '\n';
      if (r.stabilized) out << "value: " << to_string(r.value) << '\n';
      out << "samples: " << r.samples << '\n';
    } else if (*closure_cmd) {
      const CascadeExpr e = expression();
      const auto pts = enumerate_points(e, depth);
      const auto r = oracle::pointwise_closure(e, pts, bound);
      out << "points: " << pts.size() << '\n';
      out << "tables: " << r.tables.size() << '\n';
      out << "exact: " << (r.exact ? "true" : "false") << '\n';
      out << "period_lcm: " << r.period_lcm << '\n';
      out << "unstabilized_classes: " << r.unstabilized << '\n';
    } else if (*crt_cmd) {
      const auto r = oracle::crt_solve(detail::parse_classes(residues_text));
      if (r.solvable)
        out << "solution: " << r.least << " mod " << r.modulus << '\n';
      else
        out << "incompatible at (" << r.conflict->first << "," << r.conflict->second << ")\n";
    } else if (*nonwap_cmd) {
      const NonWapReport rep = nonwap_witness(k);
      out << "residues: " << rep.residues.to_string() << '\n';
      out << detail::pad("n", 6) << detail::pad("point", 22) << detail::pad("period", 8)
          << detail::pad("residue", 9) << "image\n";
      for (const auto& row : rep.rows)
        out << detail::pad(std::to_string(row.n), 6) << detail::pad(row.point.to_string(), 22)
            << detail::pad(std::to_string(row.period), 8) << detail::pad(std::to_string(row.residue), 9)
            << row.image.to_string() << '\n';
      out << "limit: " << rep.limit.to_string() << " -> " << rep.limit_image.to_string() << '\n';
      out << "images_converge_to: " << rep.images_limit.to_string() << '\n';
      out << "angular_gap: " << rep.angular_gap.numerator();
      if (rep.angular_gap.denominator() != 1) out << "/" << rep.angular_gap.denominator();
      out << "·pi\n";
    }
  } catch (const detail::Usage& e) {
    err << "usage error: " << e.what() << '\n' << kGrammar;
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n' << kGrammar;
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace detail

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on a domain error and 2 on a usage or syntax error.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return detail::run(args, out, err);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cascade::cli
