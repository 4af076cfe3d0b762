// tune.hpp
//
// Dev-set grid search over (threshold, max_iter) and per-iteration corpus
// scoring. A single decode at the largest iteration count serves every
// smaller one: the loop's first k iterations are identical to a run capped
// at k.

#ifndef REVFORGE_TUNE_HPP
#define REVFORGE_TUNE_HPP

#include <vector>

#include "revforge/decode.hpp"
#include "revforge/metrics.hpp"

namespace revforge {

// Output after k iterations for k = 1..params.max_iter; entries beyond
// termination repeat the final sentence.
std::vector<Tokens> outputs_per_iteration(const Tokens& source,
                                          const StepScorer& scorer,
                                          const DecodeParams& params);

// Corpus score at each iteration count (Fig-2 style curve; index 0 is
// single-shot decoding).
std::vector<ScoreReport> per_iteration_report(const std::vector<M2Entry>& dev,
                                              const StepScorer& scorer,
                                              const DecodeParams& params,
                                              int workers = 1);

struct TuneGrid {
  std::vector<double> thresholds;
  std::vector<int> max_iters;
};

struct TunePoint {
  double threshold = 0.0;
  int max_iter = 0;
  ScoreReport score;
};

struct TuneResult {
  DecodeParams best;
  std::vector<TunePoint> table;
};

// Decodes the dev set at every grid point and returns the argmax-F0.5
// parameters; ties prefer the smaller max_iter, then the smaller
// threshold.
TuneResult tune_params(const std::vector<M2Entry>& dev,
                       const StepScorer& scorer, const TuneGrid& grid,
                       const DecodeParams& base, int workers = 1);

}  // namespace revforge

#endif  // REVFORGE_TUNE_HPP
