// rule_model.hpp
//
// A deterministic, rule-driven StepScorer: the decoder walks the source
// left to right with a cursor; at each position it may copy the source
// token or apply a rewrite rule matched at the cursor. A rule's cost is
// the penalty a path pays for *keeping* a token the rule recognizes as
// wrong, so confident corrections genuinely score better than copying the
// error, the way a trained model behaves. A per-pass edit budget caps how
// many rule applications a single decode may use, which is what makes
// iterative decoding observably better than single-shot on sentences with
// many errors.
//
// Rule file: TSV columns context_left, match, replacement, context_right,
// cost. `_` denotes empty context (and an empty replacement); `^`/`$`
// anchor to the sequence start/end. Directives `@copy_cost`, `@eos_cost`
// and `@max_edits_per_pass` override the defaults. `#` starts a comment.

#ifndef REVFORGE_RULE_MODEL_HPP
#define REVFORGE_RULE_MODEL_HPP

#include <string>
#include <vector>

#include "revforge/scorer.hpp"

namespace revforge {

struct RewriteRule {
  std::string left_ctx;   // "_" none, "^" sequence start, else source token
  std::string match;      // source token consumed at the cursor
  Tokens replacement;     // may be empty (deletion)
  std::string right_ctx;  // "_" none, "$" sequence end, else source token
  double cost = 0.0;      // > 0; penalty for keeping the matched token
  size_t line_no = 0;
};

struct RuleTable {
  std::vector<RewriteRule> rules;
  double copy_cost = 0.1;
  double eos_cost = 0.05;
  int max_edits_per_pass = 3;

  static RuleTable load(const std::string& path);
  static RuleTable parse(const std::string& text);
  void validate() const;
};

class RuleScorer : public StepScorer {
 public:
  explicit RuleScorer(RuleTable table);

  std::vector<Candidate> next_scores(const Tokens& source,
                                     const Tokens& prefix) const override;

  const RuleTable& table() const { return table_; }

 private:
  RuleTable table_;
};

}  // namespace revforge

#endif  // REVFORGE_RULE_MODEL_HPP
