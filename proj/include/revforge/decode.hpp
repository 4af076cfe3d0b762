// decode.hpp
//
// Beam search over a StepScorer plus the confidence-thresholded iterative
// decoder built on top of it: per iteration run a conventional beam search
// and output the best non-identity hypothesis only when
//
//     cost(best non-identity) < threshold * cost(identity)
//
// with the identity cost taken as +inf when the identity is not in the
// n-best; otherwise output the identity. Each iteration's output feeds the
// next until a fixed point or max_iter.

#ifndef REVFORGE_DECODE_HPP
#define REVFORGE_DECODE_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "revforge/scorer.hpp"

namespace revforge {

struct Hypothesis {
  Tokens tokens;
  double cost = 0.0;  // sum of per-step negative log probs, >= 0
  bool complete = false;
};

// Up to `beam` completed hypotheses, ascending by cost, ties broken
// lexicographically by token sequence. Expansion keeps the `beam`
// lowest-cost partials per length step.
std::vector<Hypothesis> beam_search(const Tokens& source,
                                    const StepScorer& scorer, size_t beam);

struct DecodeParams {
  size_t beam = 4;
  double threshold = 0.98;
  int max_iter = 10;
  bool early_stop_on_fixed_point = true;

  void validate() const;
};

struct IterationRecord {
  Tokens input;
  std::vector<Hypothesis> nbest;
  double identity_cost = 0.0;          // +inf when identity not in n-best
  double best_nonidentity_cost = 0.0;  // +inf when no non-identity exists
  bool accepted = false;
  Tokens output;
};

struct DecodeTrace {
  std::vector<IterationRecord> iterations;
  Tokens final_tokens;
  bool cycled = false;  // revisited an earlier sentence other than fixed point
};

DecodeTrace iterative_decode(const Tokens& source, const StepScorer& scorer,
                             const DecodeParams& params);

// Per-step arithmetic mean of member scores over the union of member
// candidate sets; a member without a candidate contributes its own step
// minimum minus floor_margin. A single-member ensemble is the member.
std::shared_ptr<const StepScorer> make_ensemble(
    std::vector<std::shared_ptr<const StepScorer>> members,
    double floor_margin = 5.0);

}  // namespace revforge

#endif  // REVFORGE_DECODE_HPP
