#include "revforge/tune.hpp"

#include <algorithm>

#include "revforge/errors.hpp"
#include "revforge/parallel.hpp"

namespace revforge {

std::vector<Tokens> outputs_per_iteration(const Tokens& source,
                                          const StepScorer& scorer,
                                          const DecodeParams& params) {
  DecodeTrace trace = iterative_decode(source, scorer, params);
  std::vector<Tokens> out;
  out.reserve(params.max_iter);
  for (size_t k = 0; k < trace.iterations.size(); ++k) {
    bool last = k + 1 == trace.iterations.size();
    // On a detected cycle the run's result is the trace final, not the
    // revisited sentence the last iteration emitted.
    out.push_back(last && trace.cycled ? trace.final_tokens
                                       : trace.iterations[k].output);
  }
  while (out.size() < static_cast<size_t>(params.max_iter))
    out.push_back(trace.final_tokens);
  return out;
}

std::vector<ScoreReport> per_iteration_report(const std::vector<M2Entry>& dev,
                                              const StepScorer& scorer,
                                              const DecodeParams& params,
                                              int workers) {
  params.validate();
  if (dev.empty()) throw DataError("per-iteration report: empty dev set");
  auto all = parallel_map<std::vector<Tokens>>(
      dev, workers, [&](const M2Entry& e, size_t) {
        return outputs_per_iteration(e.source, scorer, params);
      });
  std::vector<ScoreReport> reports;
  reports.reserve(params.max_iter);
  for (int k = 0; k < params.max_iter; ++k) {
    std::vector<M2Case> cases(dev.size());
    for (size_t i = 0; i < dev.size(); ++i)
      cases[i] = {dev[i].source, all[i][k], dev[i].gold_by_annotator};
    reports.push_back(m2_score(cases));
  }
  return reports;
}

TuneResult tune_params(const std::vector<M2Entry>& dev,
                       const StepScorer& scorer, const TuneGrid& grid,
                       const DecodeParams& base, int workers) {
  if (dev.empty()) throw DataError("tune: empty dev set");
  if (grid.thresholds.empty() || grid.max_iters.empty())
    throw ConfigError("tune: empty grid");
  for (double t : grid.thresholds)
    if (!(t > 0.0)) throw ConfigError("tune: thresholds must be > 0");
  for (int k : grid.max_iters)
    if (k < 1) throw ConfigError("tune: max_iters must be >= 1");

  int max_k = *std::max_element(grid.max_iters.begin(), grid.max_iters.end());

  TuneResult result;
  for (double threshold : grid.thresholds) {
    DecodeParams p = base;
    p.threshold = threshold;
    p.max_iter = max_k;
    std::vector<ScoreReport> by_iter;
    try {
      by_iter = per_iteration_report(dev, scorer, p, workers);
    } catch (const std::exception& e) {
      throw DecodeError("tune: threshold " + std::to_string(threshold) + ": " +
                        e.what());
    }
    for (int k : grid.max_iters) {
      TunePoint point;
      point.threshold = threshold;
      point.max_iter = k;
      point.score = by_iter[k - 1];
      result.table.push_back(point);
    }
  }

  // Argmax F0.5; ties prefer smaller max_iter, then smaller threshold.
  const TunePoint* best = nullptr;
  for (const TunePoint& pt : result.table) {
    bool better =
        !best || pt.score.f_half > best->score.f_half ||
        (pt.score.f_half == best->score.f_half &&
         (pt.max_iter < best->max_iter ||
          (pt.max_iter == best->max_iter && pt.threshold < best->threshold)));
    if (better) best = &pt;
  }
  result.best = base;
  result.best.threshold = best->threshold;
  result.best.max_iter = best->max_iter;
  return result;
}

}  // namespace revforge
