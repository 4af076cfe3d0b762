#include <algorithm>
#include <limits>

#include "revforge/decode.hpp"
#include "revforge/errors.hpp"

namespace revforge {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DecodeParams::validate() const {
  std::string errs;
  if (beam < 1) errs += "beam must be >= 1; ";
  if (!(threshold > 0.0)) errs += "threshold must be > 0; ";
  if (max_iter < 1) errs += "max_iter must be >= 1; ";
  if (!errs.empty()) throw ConfigError("decode params: " + errs);
}

DecodeTrace iterative_decode(const Tokens& source, const StepScorer& scorer,
                             const DecodeParams& params) {
  params.validate();
  DecodeTrace trace;
  Tokens input = source;

  // Sentences produced so far with the cost they decoded at; used both for
  // cycle detection and, on a cycle, for picking the sentence to keep.
  std::vector<std::pair<Tokens, double>> seen;
  seen.emplace_back(source, kInf);

  for (int iter = 0; iter < params.max_iter; ++iter) {
    std::vector<Hypothesis> nbest = beam_search(input, scorer, params.beam);

    double c_identity = kInf;
    double c_non = kInf;
    const Hypothesis* h_non = nullptr;
    for (const Hypothesis& h : nbest) {
      if (h.tokens == input) {
        c_identity = h.cost;
      } else if (h.cost < c_non) {
        c_non = h.cost;
        h_non = &h;
      }
    }

    // Rewrite only when strictly confident; finite/inf compares as 0, so a
    // missing identity always accepts an existing rewrite.
    bool accepted = h_non != nullptr && c_non / c_identity < params.threshold;
    Tokens output = accepted ? h_non->tokens : input;
    double out_cost = accepted ? c_non : c_identity;

    trace.iterations.push_back(
        {input, std::move(nbest), c_identity, c_non, accepted, output});
    trace.final_tokens = output;

    if (output == input) {
      if (params.early_stop_on_fixed_point) break;
      continue;
    }
    bool revisit = std::any_of(seen.begin(), seen.end(),
                               [&](const auto& s) { return s.first == output; });
    if (revisit) {
      trace.cycled = true;
      // Keep the lowest-cost sentence seen; earliest wins ties.
      const Tokens* best = &output;
      double best_cost = out_cost;
      for (auto it = seen.rbegin(); it != seen.rend(); ++it) {
        if (it->second <= best_cost) {
          best = &it->first;
          best_cost = it->second;
        }
      }
      trace.final_tokens = *best;
      break;
    }
    seen.emplace_back(output, out_cost);
    input = std::move(output);
  }
  return trace;
}

}  // namespace revforge
