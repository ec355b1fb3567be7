#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/cli.hpp"

using cascade::cli::run_command;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

bool has(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string sample(const std::string& name) { return std::string(CASCADE_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Cli, ClassifyShift2) {
  const auto r = run({"classify", "shift2"});
  EXPECT_EQ(r.code, 0);
  for (const char* key : {"all_periodic: false", "equicontinuous: false", "distal: false",
                          "fp_homeo_exists: false", "uniform_bound_exists: false", "en_eq_ez: false",
                          "witness_noninjective_element: f^+", "witness_equicont_failure:"})
    EXPECT_TRUE(has(r.out, key)) << key;
  EXPECT_TRUE(r.err.empty());
}

TEST(Cli, ClassifyPeriodicFromFile) {
  const auto r = run({"classify", "--file", sample("tower_geometric.cas")});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "all_periodic: true"));
  EXPECT_TRUE(has(r.out, "en_eq_ez: true"));
  EXPECT_FALSE(has(r.out, "witness_"));
}

TEST(Cli, MultiLineSampleParses) {
  const auto r = run({"classify", "--file", sample("mixed.cas")});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "all_periodic: false"));
}

TEST(Cli, RealizabilityReportsConflict) {
  const auto bad = run({"realizable", "4:3,16:9"});
  EXPECT_EQ(bad.code, 0);
  EXPECT_EQ(bad.out, "realizable: no\nincompatible at (4,16)\n");
  const auto good = run({"realizable", "4:3,16:3"});
  EXPECT_EQ(good.code, 0);
  EXPECT_TRUE(has(good.out, "realizable: yes"));
}

TEST(Cli, OracleCrt) {
  const auto r = run({"oracle", "crt", "2:1,3:2,4:3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "solution: 11 mod 12\n");
}

TEST(Cli, ElementOperations) {
  EXPECT_EQ(run({"evaluate", "cycle(3)", "--e", "fwd(3:2)", "--point", "0"}).out, "result: 2\n");
  const auto c = run({"compose", "shift2", "--g", "f^+", "--h", "f^-"});
  EXPECT_EQ(c.code, 0);
  EXPECT_TRUE(has(c.out, "result: bwd("));
}

TEST(Cli, DomainErrorsExitOne) {
  const auto r = run({"inverse", "shift2", "--e", "f^+"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
  EXPECT_TRUE(has(r.err, "not injective"));
  EXPECT_EQ(run({"periods", "--file", sample("no_such_file.cas")}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto syntax = run({"classify", "cycle("});
  EXPECT_EQ(syntax.code, 2);
  EXPECT_TRUE(has(syntax.err, "syntax error"));
  EXPECT_TRUE(has(syntax.err, "expr    :="));
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"classify"}).code, 2);
  EXPECT_EQ(run({"classify", "shift2", "--file", sample("shift2.cas")}).code, 2);
  EXPECT_EQ(run({"classify", "shift2", "--depth", "-3"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, HelpGoesToStdout) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "classify"));
  EXPECT_TRUE(r.err.empty());
}

TEST(Cli, OutputIsDeterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"classify", "sum(shift2,cycle(3))"},
        std::vector<std::string>{"ellis", "cycle(4)"}, std::vector<std::string>{"disk", "nonwap", "--k", "4"}}) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Cli, FileAndInlineAgree) {
  EXPECT_EQ(run({"classify", "--file", sample("sum23.cas")}).out, run({"classify", "sum(cycle(2),cycle(3))"}).out);
  EXPECT_EQ(run({"periods", "--file", sample("ishift.cas")}).out, run({"periods", "ishift"}).out);
}

TEST(Cli, FuzzedArgumentsNeverCrash) {
  const std::vector<std::string> seeds = {"shift2", "ishift", "cycle(3)", "sum(cycle(2),shift2)",
                                          "tower(cycle(2),cycle(2^n))", "cycleof(ishift,2)",
                                          "4:3,16:9", "2^n:2^n-1", "fwd(n:0)", "L.p2.0"};
  const std::vector<std::string> cmds = {"classify", "periods", "ellis", "realizable", "en-eq-ez",
                                         "wap", "equicont", "witness", "evaluate", "inverse"};
  const std::string alphabet = "()[],:.^*+-0123456789nfLRcpx \t\n\xff";
  std::mt19937_64 rng(20261016);
  for (int i = 0; i < 400; ++i) {
    std::string text = seeds[rng() % seeds.size()];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits && !text.empty(); ++k) {
      const std::size_t pos = rng() % (text.size() + 1);
      switch (rng() % 3) {
        case 0: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        case 1: if (pos < text.size()) text.erase(pos, 1); break;
        default: if (pos < text.size()) text[pos] = static_cast<char>(rng() % 256); break;
      }
    }
    std::vector<std::string> args = {cmds[rng() % cmds.size()], text, "--depth", "4", "--iter-bound", "16"};
    if (args[0] == "equicont" || args[0] == "witness") args.insert(args.end(), {"--eps", "1/4"});
    if (args[0] == "evaluate") args.insert(args.end(), {"--e", "f", "--point", "0"});
    if (args[0] == "inverse") args.insert(args.end(), {"--e", text});
    if (args[0] == "realizable") args.resize(2);
    const auto r = run(args);
    EXPECT_TRUE(r.code == 0 || r.code == 1 || r.code == 2) << text;
    EXPECT_FALSE(has(r.err, "internal error")) << args[0] << " " << text << ": " << r.err;
  }
}
