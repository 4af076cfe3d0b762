// metrics.hpp
//
// Edit-level scoring: F_beta arithmetic, minimal-edit-script extraction
// with gold-aware tie-breaking, and corpus-level precision/recall with the
// standard multi-annotator rule (per case, the annotator that maximizes
// the running corpus F score is charged).
//
// Edit extraction uses token costs ins=1, del=1, sub=2, so substitution
// scripts and delete+insert scripts genuinely tie and the tie is resolved
// in favor of gold matches (or the lexicographically first script when no
// gold is supplied). Adjacent non-match steps merge into one edit.

#ifndef REVFORGE_METRICS_HPP
#define REVFORGE_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "revforge/tokenize.hpp"

namespace revforge {

double f_beta(double p, double r, double beta);

struct Edit {
  size_t start = 0;  // token span [start, end) on the source
  size_t end = 0;
  Tokens replacement;

  bool operator==(const Edit& o) const {
    return start == o.start && end == o.end && replacement == o.replacement;
  }
  bool operator<(const Edit& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return replacement < o.replacement;
  }
};

using EditSet = std::vector<Edit>;  // sorted, non-overlapping

// Minimal-cost edit script between source and hypothesis, merged into
// edits. With gold, picks a minimal script maximizing the number of edits
// exactly matching gold edits.
EditSet extract_edits(const Tokens& source, const Tokens& hyp,
                      const EditSet* gold = nullptr);

// Applies a sorted, non-overlapping EditSet; inverse of extract_edits.
Tokens apply_edits(const Tokens& source, const EditSet& edits);

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_half = 0.0;
  uint64_t tp = 0, fp = 0, fn = 0;
  std::optional<double> gleu;
};

struct M2Case {
  Tokens source;
  Tokens hyp;
  std::map<int, EditSet> gold_by_annotator;  // empty edit sets allowed
};

ScoreReport m2_score(const std::vector<M2Case>& cases, double beta = 0.5);

// The standard M2 text format: an `S <tokens>` line followed by
// `A start end|||type|||replacement|||REQUIRED|||-NONE-|||annotator`
// lines, blank-line separated. Parsed entries keep annotator ids; `noop`
// edits register the annotator with no edits.
struct M2Entry {
  Tokens source;
  std::map<int, EditSet> gold_by_annotator;
};

std::vector<M2Entry> read_m2(std::istream& in);
std::vector<M2Entry> read_m2_file(const std::string& path);

}  // namespace revforge

#endif  // REVFORGE_METRICS_HPP
