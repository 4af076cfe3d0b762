#include <algorithm>
#include <limits>
#include <map>

#include "revforge/decode.hpp"
#include "revforge/errors.hpp"

namespace revforge {

namespace {

struct Partial {
  Tokens tokens;
  double cost = 0.0;
};

bool partial_less(const Partial& a, const Partial& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.tokens < b.tokens;
}

bool hyp_less(const Hypothesis& a, const Hypothesis& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.tokens < b.tokens;
}

}  // namespace

std::vector<Hypothesis> beam_search(const Tokens& source,
                                    const StepScorer& scorer, size_t beam) {
  if (beam < 1) throw ConfigError("beam must be >= 1");

  // Guard against scorers that never emit end-of-sequence.
  const size_t max_steps = std::max<size_t>(64, 4 * (source.size() + 1));

  std::vector<Partial> live{Partial{}};
  std::vector<Hypothesis> done;

  for (size_t step = 0; step <= max_steps && !live.empty(); ++step) {
    if (done.size() >= beam) {
      // Costs only grow along a path, so once the best live partial cannot
      // beat the beam-th completed hypothesis we are finished.
      std::partial_sort(done.begin(), done.begin() + beam, done.end(), hyp_less);
      if (live.front().cost > done[beam - 1].cost) break;
    }

    std::vector<Partial> expansions;
    for (const Partial& p : live) {
      std::vector<Candidate> cands = scorer.next_scores(source, p.tokens);
      if (cands.empty())
        throw DecodeError("scorer returned no candidates for prefix: \"" +
                          join_tokens(p.tokens) + "\"");
      // Dedup by candidate identity, keeping the best score.
      std::map<std::pair<bool, std::string>, double> merged;
      for (const Candidate& c : cands) {
        if (c.log_prob > 1e-6)
          throw DecodeError("scorer returned positive log-prob " +
                            std::to_string(c.log_prob) + " for token \"" +
                            c.token + "\"");
        double lp = std::min(c.log_prob, 0.0);
        auto key = std::make_pair(c.is_eos, c.token);
        auto it = merged.find(key);
        if (it == merged.end() || lp > it->second) merged[key] = lp;
      }
      for (const auto& [key, lp] : merged) {
        double cost = p.cost - lp;
        if (key.first) {
          done.push_back({p.tokens, cost, true});
        } else {
          Partial q;
          q.tokens = p.tokens;
          q.tokens.push_back(key.second);
          q.cost = cost;
          expansions.push_back(std::move(q));
        }
      }
    }
    std::sort(expansions.begin(), expansions.end(), partial_less);
    if (expansions.size() > beam) expansions.resize(beam);
    live = std::move(expansions);
  }

  if (done.empty())
    throw DecodeError("no hypothesis completed within the step limit");
  std::sort(done.begin(), done.end(), hyp_less);
  if (done.size() > beam) done.resize(beam);
  return done;
}

}  // namespace revforge
