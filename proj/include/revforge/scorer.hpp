// scorer.hpp
//
// The decoder's model abstraction: anything that can score the next step
// of a left-to-right rewrite of a source sentence.

#ifndef REVFORGE_SCORER_HPP
#define REVFORGE_SCORER_HPP

#include <string>
#include <vector>

#include "revforge/tokenize.hpp"

namespace revforge {

struct Candidate {
  std::string token;       // empty for end-of-sequence
  double log_prob = 0.0;   // <= 0; additive across steps
  bool is_eos = false;
};

// Implementations must be deterministic for fixed inputs and usable
// concurrently from multiple workers in read-only fashion.
class StepScorer {
 public:
  virtual ~StepScorer() = default;

  // Scores for every candidate continuation of `prefix`, including
  // end-of-sequence where legal. Never empty for a prefix the decoder can
  // reach; log probs need not be normalized but must not be positive.
  virtual std::vector<Candidate> next_scores(const Tokens& source,
                                             const Tokens& prefix) const = 0;
};

}  // namespace revforge

#endif  // REVFORGE_SCORER_HPP
