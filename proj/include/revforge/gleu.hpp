// gleu.hpp
//
// Corpus GLEU for correction outputs: modified n-gram precision that
// rewards reference n-grams and penalizes n-grams retained from the source
// when the reference dropped them, combined with the usual brevity
// penalty. With multiple references, each sampling iteration draws one
// reference per case from a seeded per-case shuffle cycled over
// iterations, so every reference is drawn equally often and the mean is
// invariant to reference order.

#ifndef REVFORGE_GLEU_HPP
#define REVFORGE_GLEU_HPP

#include <cstdint>
#include <vector>

#include "revforge/tokenize.hpp"

namespace revforge {

struct GleuCase {
  Tokens source;
  Tokens hyp;
  std::vector<Tokens> references;  // at least one
};

double gleu(const std::vector<GleuCase>& cases, int n_max = 4,
            int iterations = 500, uint64_t seed = 0);

}  // namespace revforge

#endif  // REVFORGE_GLEU_HPP
