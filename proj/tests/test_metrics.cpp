#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "revforge/errors.hpp"
#include "revforge/gleu.hpp"
#include "revforge/metrics.hpp"
#include "revforge/rng.hpp"

using namespace revforge;

TEST_CASE("f_beta reproduces the published operating points") {
  // Percent-scale targets from the scorer's reference table; inputs are
  // rounded to 3 digits so tolerances are 0.05 (0.2 for the noisier row).
  CHECK(std::abs(f_beta(0.675, 0.378, 0.5) * 100.0 - 58.3) <= 0.05);
  CHECK(std::abs(f_beta(0.630, 0.389, 0.5) * 100.0 - 56.1) <= 0.05);
  CHECK(std::abs(f_beta(0.568, 0.303, 0.5) * 100.0 - 48.2) <= 0.2);
}

TEST_CASE("f_beta identities and monotonicity") {
  for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    CHECK(f_beta(x, x, 0.5) == doctest::Approx(x).epsilon(1e-12));
    CHECK(f_beta(x, x, 2.0) == doctest::Approx(x).epsilon(1e-12));
  }
  // beta = 1 is the harmonic mean.
  CHECK(f_beta(0.4, 0.6, 1.0) ==
        doctest::Approx(2 * 0.4 * 0.6 / (0.4 + 0.6)).epsilon(1e-12));
  CHECK(f_beta(0.0, 0.7, 0.5) == 0.0);
  CHECK(f_beta(0.7, 0.0, 0.5) == 0.0);

  SplitMix64 rng(11);
  for (int t = 0; t < 300; ++t) {
    double p = rng.uniform(), r = rng.uniform(), d = rng.uniform() * (1 - p);
    CHECK(f_beta(p + d, r, 0.5) >= f_beta(p, r, 0.5) - 1e-12);
    CHECK(f_beta(p, std::min(1.0, r + d), 0.5) >= f_beta(p, r, 0.5) - 1e-12);
  }
  CHECK_THROWS_AS(f_beta(1.2, 0.5, 0.5), ConfigError);
  CHECK_THROWS_AS(f_beta(0.5, 0.5, 0.0), ConfigError);
}

TEST_CASE("extract_edits basics") {
  CHECK(extract_edits({"a", "b", "c"}, {"a", "b", "c"}).empty());

  EditSet mid = extract_edits({"a", "b", "c"}, {"a", "x", "c"});
  REQUIRE(mid.size() == 1);
  CHECK(mid[0] == Edit{1, 2, {"x"}});

  EditSet ins = extract_edits({"a", "c"}, {"a", "b", "c"});
  REQUIRE(ins.size() == 1);
  CHECK(ins[0] == Edit{1, 1, {"b"}});

  EditSet del = extract_edits({"a", "b", "c"}, {"a", "c"});
  REQUIRE(del.size() == 1);
  CHECK(del[0] == Edit{1, 2, {}});
}

TEST_CASE("gold steers tie-breaking between equal-cost scripts") {
  // "a b" -> "b a" has two minimal merged scripts:
  //   {(0,1,[]), (2,2,[a])}   delete a, append a
  //   {(0,0,[b]), (1,2,[])}   prepend b, delete b
  Tokens src = {"a", "b"}, hyp = {"b", "a"};
  EditSet gold1 = {Edit{0, 1, {}}, Edit{2, 2, {"a"}}};
  EditSet gold2 = {Edit{0, 0, {"b"}}, Edit{1, 2, {}}};
  CHECK(extract_edits(src, hyp, &gold1) == gold1);
  CHECK(extract_edits(src, hyp, &gold2) == gold2);
  // Both answers round-trip.
  CHECK(apply_edits(src, gold1) == hyp);
  CHECK(apply_edits(src, gold2) == hyp);
}

TEST_CASE("apply_edits round-trips extraction (fuzz)") {
  SplitMix64 rng(77);
  for (int t = 0; t < 500; ++t) {
    Tokens src, hyp;
    size_t n = rng.below(13), m = rng.below(13);
    for (size_t i = 0; i < n; ++i) src.push_back("t" + std::to_string(rng.below(5)));
    for (size_t j = 0; j < m; ++j) hyp.push_back("t" + std::to_string(rng.below(5)));
    EditSet edits = extract_edits(src, hyp);
    CHECK(apply_edits(src, edits) == hyp);
    for (size_t k = 1; k < edits.size(); ++k)
      CHECK(edits[k - 1].end <= edits[k].start);
  }
}

namespace {

// Independent oracle: enumerate every minimal-cost script by brute-force
// recursion (ins=del=1, sub=2), merge runs, and return the deduplicated
// edit sets along with the lexicographically first script's set.
struct EditOracle {
  Tokens src, hyp;
  std::map<std::pair<size_t, size_t>, int> memo;

  int dist(size_t i, size_t j) {
    if (i == src.size()) return int(hyp.size() - j);
    if (j == hyp.size()) return int(src.size() - i);
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int best = 1 + dist(i + 1, j);
    best = std::min(best, 1 + dist(i, j + 1));
    best = std::min(best, (src[i] == hyp[j] ? 0 : 2) + dist(i + 1, j + 1));
    memo[key] = best;
    return best;
  }

  void enumerate(size_t i, size_t j, std::string script,
                 std::vector<std::string>* scripts) {
    if (scripts->size() > 20000) return;  // cap for pathological cases
    if (i == src.size() && j == hyp.size()) {
      scripts->push_back(script);
      return;
    }
    int remaining = dist(i, j);
    if (i < src.size() && j < hyp.size() && src[i] == hyp[j] &&
        dist(i + 1, j + 1) == remaining)
      enumerate(i + 1, j + 1, script + "M", scripts);
    if (i < src.size() && j < hyp.size() && src[i] != hyp[j] &&
        2 + dist(i + 1, j + 1) == remaining)
      enumerate(i + 1, j + 1, script + "S", scripts);
    if (i < src.size() && 1 + dist(i + 1, j) == remaining)
      enumerate(i + 1, j, script + "D", scripts);
    if (j < hyp.size() && 1 + dist(i, j + 1) == remaining)
      enumerate(i, j + 1, script + "I", scripts);
  }

  EditSet merge(const std::string& script) const {
    EditSet edits;
    size_t i = 0, j = 0;
    bool run = false;
    size_t si = 0, sj = 0;
    for (char mv : script) {
      if (mv == 'M') {
        if (run) {
          edits.push_back({si, i, Tokens(hyp.begin() + sj, hyp.begin() + j)});
          run = false;
        }
        ++i, ++j;
        continue;
      }
      if (!run) {
        run = true;
        si = i;
        sj = j;
      }
      if (mv == 'S') ++i, ++j;
      else if (mv == 'D') ++i;
      else ++j;
    }
    if (run) edits.push_back({si, i, Tokens(hyp.begin() + sj, hyp.begin() + j)});
    return edits;
  }
};

}  // namespace

TEST_CASE("extract_edits matches the brute-force oracle (randomized)") {
  SplitMix64 rng(909);
  int cases = 0;
  while (cases < 500) {
    EditOracle oracle;
    size_t n = rng.below(9), m = rng.below(9);  // <= 8 tokens
    for (size_t i = 0; i < n; ++i)
      oracle.src.push_back("t" + std::to_string(rng.below(4)));
    for (size_t j = 0; j < m; ++j)
      oracle.hyp.push_back("t" + std::to_string(rng.below(4)));

    std::vector<std::string> scripts;
    oracle.enumerate(0, 0, "", &scripts);
    if (scripts.size() > 20000) continue;
    REQUIRE(!scripts.empty());
    std::sort(scripts.begin(), scripts.end(), [](const std::string& a,
                                                 const std::string& b) {
      auto rank = [](char c) { return std::string("MSDI").find(c); };
      for (size_t k = 0; k < std::min(a.size(), b.size()); ++k)
        if (a[k] != b[k]) return rank(a[k]) < rank(b[k]);
      return a.size() < b.size();
    });

    // Without gold: the lexicographically first minimal script.
    EditSet expected = oracle.merge(scripts.front());
    EditSet got = extract_edits(oracle.src, oracle.hyp);
    CHECK(got == expected);

    // With gold (a random minimal script's edits): maximal match count.
    std::set<EditSet> all_sets;
    for (const auto& s : scripts) all_sets.insert(oracle.merge(s));
    size_t pick = rng.below(all_sets.size());
    auto it = all_sets.begin();
    std::advance(it, pick);
    EditSet gold = *it;

    size_t best_hits = 0;
    for (const auto& es : all_sets) {
      size_t hits = 0;
      for (const auto& e : es)
        if (std::find(gold.begin(), gold.end(), e) != gold.end()) ++hits;
      best_hits = std::max(best_hits, hits);
    }
    EditSet chosen = extract_edits(oracle.src, oracle.hyp, &gold);
    size_t got_hits = 0;
    for (const auto& e : chosen)
      if (std::find(gold.begin(), gold.end(), e) != gold.end()) ++got_hits;
    CHECK(got_hits == best_hits);
    CHECK(apply_edits(oracle.src, chosen) == oracle.hyp);
    ++cases;
  }
}

TEST_CASE("m2_score: perfect corrections") {
  std::vector<M2Case> cases;
  M2Case a;
  a.source = split_ws("this is nto the pizzza");
  a.hyp = split_ws("this is not the pizza");
  a.gold_by_annotator[0] = {Edit{2, 3, {"not"}}, Edit{4, 5, {"pizza"}}};
  cases.push_back(a);
  M2Case b;
  b.source = split_ws("teh end");
  b.hyp = split_ws("the end");
  b.gold_by_annotator[0] = {Edit{0, 1, {"the"}}};
  cases.push_back(b);

  ScoreReport r = m2_score(cases);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.f_half == doctest::Approx(1.0));
  CHECK(r.tp == 3);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
}

TEST_CASE("m2_score: unchanged hypothesis with nonempty gold scores zero") {
  M2Case c;
  c.source = split_ws("teh end");
  c.hyp = c.source;
  c.gold_by_annotator[0] = {Edit{0, 1, {"the"}}};
  ScoreReport r = m2_score({c});
  CHECK(r.tp == 0);
  CHECK(r.recall == 0.0);
  CHECK(r.f_half == 0.0);
  CHECK(r.precision == 1.0);  // no proposals convention
}

TEST_CASE("m2_score: the better annotator is charged per case") {
  M2Case c;
  c.source = split_ws("a b c");
  c.hyp = split_ws("a x c");
  c.gold_by_annotator[1] = {Edit{0, 1, {"q"}}};   // no overlap
  c.gold_by_annotator[2] = {Edit{1, 2, {"x"}}};   // exactly the system edit
  ScoreReport r = m2_score({c});
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.tp == 1);
}

TEST_CASE("m2_score: noop gold with no proposals is perfect") {
  M2Case c;
  c.source = split_ws("all good here");
  c.hyp = c.source;
  c.gold_by_annotator[0] = {};
  ScoreReport r = m2_score({c});
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f_half == 1.0);
}

TEST_CASE("read_m2 parses the standard format") {
  std::string text =
      "S this is nto the pizzza\n"
      "A 2 3|||R:SPELL|||not|||REQUIRED|||-NONE-|||0\n"
      "A 4 5|||R:SPELL|||pizza|||REQUIRED|||-NONE-|||0\n"
      "A 2 5|||R:OTHER|||not the pizza|||REQUIRED|||-NONE-|||1\n"
      "\n"
      "S delete me please\n"
      "A 0 1|||U:DET||||||REQUIRED|||-NONE-|||0\n"
      "\n"
      "S fine sentence\n"
      "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n";
  std::istringstream in(text);
  auto entries = read_m2(in);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].source.size() == 5);
  CHECK(entries[0].gold_by_annotator.at(0).size() == 2);
  CHECK(entries[0].gold_by_annotator.at(1).size() == 1);
  CHECK(entries[0].gold_by_annotator.at(1)[0].replacement ==
        Tokens{"not", "the", "pizza"});
  CHECK(entries[1].gold_by_annotator.at(0)[0].replacement.empty());
  CHECK(entries[2].gold_by_annotator.at(0).empty());  // noop registers
}

TEST_CASE("read_m2 rejects malformed input") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_m2(in);
  };
  CHECK_THROWS_AS(parse("A 0 1|||T|||x|||REQUIRED|||-NONE-|||0\n"), DataError);
  CHECK_THROWS_AS(parse("S a b\nA 0 9|||T|||x|||REQUIRED|||-NONE-|||0\n"),
                  DataError);
  CHECK_THROWS_AS(parse("S a b\nwhat is this\n"), DataError);
  CHECK_THROWS_AS(
      parse("S a b c\nA 0 2|||T|||x|||REQUIRED|||-NONE-|||0\n"
            "A 1 3|||T|||y|||REQUIRED|||-NONE-|||0\n"),
      DataError);  // overlapping edits, same annotator
}

TEST_CASE("gleu identities") {
  GleuCase c;
  c.source = split_ws("a b c d");
  c.hyp = split_ws("x y z w");
  c.references = {split_ws("x y z w")};
  CHECK(gleu({c}) == doctest::Approx(1.0).epsilon(1e-12));

  // hyp == source sharing nothing with the reference
  GleuCase z;
  z.source = split_ws("a b c");
  z.hyp = split_ws("a b c");
  z.references = {split_ws("x y z")};
  CHECK(gleu({z}) == doctest::Approx(0.0).epsilon(1e-12));
}

namespace {

// Hand oracle for one case: literal n-gram counting with nested loops,
// no shared code with the implementation.
double gleu_hand_oracle(const Tokens& src, const Tokens& hyp, const Tokens& ref,
                        int n_max) {
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= n_max; ++n) {
    if (int(hyp.size()) < n) continue;
    std::map<Tokens, int> h, r, s;
    for (size_t i = 0; i + n <= hyp.size(); ++i)
      ++h[Tokens(hyp.begin() + i, hyp.begin() + i + n)];
    for (size_t i = 0; ref.size() >= size_t(n) && i + n <= ref.size(); ++i)
      ++r[Tokens(ref.begin() + i, ref.begin() + i + n)];
    for (size_t i = 0; src.size() >= size_t(n) && i + n <= src.size(); ++i)
      ++s[Tokens(src.begin() + i, src.begin() + i + n)];
    long num = 0, den = 0;
    for (auto& [g, hc] : h) {
      den += hc;
      long in_ref = std::min<long>(hc, r.count(g) ? r[g] : 0);
      num += in_ref;
      if (s.count(g) && !r.count(g))
        num -= std::max(0L, std::min<long>(hc, s[g]) - in_ref);
    }
    if (den == 0) continue;
    ++orders;
    double p = double(std::max(0L, num)) / double(den);
    if (p <= 0.0) return 0.0;
    log_sum += std::log(p);
  }
  if (orders == 0) return 0.0;
  double bp = hyp.size() >= ref.size()
                  ? 1.0
                  : std::exp(1.0 - double(ref.size()) / double(hyp.size()));
  return bp * std::exp(log_sum / orders);
}

}  // namespace

TEST_CASE("gleu: three-token case against the hand oracle") {
  GleuCase c;
  c.source = split_ws("a b c");
  c.hyp = split_ws("a x b");
  c.references = {split_ws("a x c")};
  // Oracle at n_max=2: p1 = (2-1)/3, p2 = 1/2, BP=1 -> sqrt(1/6).
  double expect = gleu_hand_oracle(c.source, c.hyp, c.references[0], 2);
  CHECK(expect == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-12));
  CHECK(gleu({c}, 2) == doctest::Approx(expect).epsilon(1e-12));

  // And the default n_max on a bigger sentence.
  GleuCase d;
  d.source = split_ws("the cat sat on teh mat today");
  d.hyp = split_ws("the cat sat on the mat today");
  d.references = {split_ws("the cat sat on the mat now")};
  CHECK(gleu({d}) == doctest::Approx(gleu_hand_oracle(d.source, d.hyp,
                                                      d.references[0], 4))
                         .epsilon(1e-12));
}

TEST_CASE("gleu: multi-reference sampling is seeded and order-invariant") {
  GleuCase c;
  c.source = split_ws("one two three four");
  c.hyp = split_ws("one two three five");
  c.references = {split_ws("one two three five"),
                  split_ws("one two four five")};
  double a = gleu({c}, 4, 500, 42);
  double b = gleu({c}, 4, 500, 42);
  CHECK(a == b);  // deterministic given seed

  GleuCase swapped = c;
  std::swap(swapped.references[0], swapped.references[1]);
  double d = gleu({swapped}, 4, 500, 42);
  // 500 iterations cycle both assignments equally often.
  CHECK(a == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("gleu bounds and errors") {
  SplitMix64 rng(31337);
  for (int t = 0; t < 100; ++t) {
    GleuCase c;
    size_t n = 1 + rng.below(8);
    for (size_t i = 0; i < n; ++i) {
      c.source.push_back("w" + std::to_string(rng.below(5)));
      c.hyp.push_back("w" + std::to_string(rng.below(5)));
      c.references.push_back({});
    }
    c.references.resize(1 + rng.below(2));
    for (auto& ref : c.references)
      for (size_t i = 0; i < n; ++i)
        ref.push_back("w" + std::to_string(rng.below(5)));
    double g = gleu({c}, 4, 20, t);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
  }
  CHECK_THROWS_AS(gleu({}), DataError);
  GleuCase no_refs;
  no_refs.source = {"a"};
  no_refs.hyp = {"a"};
  CHECK_THROWS_AS(gleu({no_refs}), DataError);
}

#include "revforge/rule_model.hpp"
#include "revforge/tune.hpp"

TEST_CASE("tune: single grid point is returned as-is") {
  M2Entry e;
  e.source = split_ws("say teh word");
  e.gold_by_annotator[0] = {Edit{1, 2, {"the"}}};
  RuleScorer scorer(RuleTable::parse(
      "@copy_cost 0.1\n@eos_cost 0.05\n_\tteh\tthe\t_\t0.8\n"));
  TuneGrid grid;
  grid.thresholds = {0.98};
  grid.max_iters = {2};
  TuneResult r = tune_params({e}, scorer, grid, DecodeParams{});
  CHECK(r.best.threshold == 0.98);
  CHECK(r.best.max_iter == 2);
  REQUIRE(r.table.size() == 1);
  CHECK(r.table[0].score.f_half == doctest::Approx(1.0));
}

TEST_CASE("tune: zero and negative thresholds are rejected") {
  M2Entry e;
  e.source = split_ws("a b");
  e.gold_by_annotator[0] = {};
  RuleScorer scorer(RuleTable::parse(""));
  TuneGrid grid;
  grid.thresholds = {0.0};
  grid.max_iters = {1};
  CHECK_THROWS_AS(tune_params({e}, scorer, grid, DecodeParams{}), ConfigError);
  grid.thresholds = {};
  CHECK_THROWS_AS(tune_params({e}, scorer, grid, DecodeParams{}), ConfigError);
}

TEST_CASE("tune: blocking threshold loses to the working one") {
  M2Entry e;
  e.source = split_ws("fix teh now");
  e.gold_by_annotator[0] = {Edit{1, 2, {"the"}}};
  RuleScorer scorer(RuleTable::parse(
      "@copy_cost 0.1\n@eos_cost 0.05\n_\tteh\tthe\t_\t0.8\n"));
  TuneGrid grid;
  grid.thresholds = {1e-6, 0.98};  // 1e-6 blocks every rewrite
  grid.max_iters = {1, 3};
  TuneResult r = tune_params({e}, scorer, grid, DecodeParams{});
  CHECK(r.best.threshold == 0.98);
  CHECK(r.best.max_iter == 1);  // F ties across max_iter, smaller wins
  CHECK(r.table.size() == 4);
}
