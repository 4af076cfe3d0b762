#include <algorithm>
#include <limits>
#include <map>

#include "revforge/decode.hpp"
#include "revforge/errors.hpp"

namespace revforge {

namespace {

class EnsembleScorer : public StepScorer {
 public:
  EnsembleScorer(std::vector<std::shared_ptr<const StepScorer>> members,
                 double floor_margin)
      : members_(std::move(members)), floor_margin_(floor_margin) {}

  std::vector<Candidate> next_scores(const Tokens& source,
                                     const Tokens& prefix) const override {
    using Key = std::pair<bool, std::string>;
    // Per member: dedup its candidates and remember its step minimum, which
    // prices candidates the member did not propose.
    std::vector<std::map<Key, double>> per_member(members_.size());
    std::vector<double> floor(members_.size());
    std::map<Key, bool> universe;
    for (size_t m = 0; m < members_.size(); ++m) {
      std::vector<Candidate> cands = members_[m]->next_scores(source, prefix);
      double lo = 0.0;
      for (const Candidate& c : cands) {
        double lp = std::min(c.log_prob, 0.0);
        Key key{c.is_eos, c.token};
        auto it = per_member[m].find(key);
        if (it == per_member[m].end() || lp > it->second)
          per_member[m][key] = lp;
        lo = std::min(lo, lp);
        universe[key] = true;
      }
      floor[m] = lo - floor_margin_;
    }
    std::vector<Candidate> out;
    out.reserve(universe.size());
    for (const auto& [key, _] : universe) {
      double sum = 0.0;
      for (size_t m = 0; m < members_.size(); ++m) {
        auto it = per_member[m].find(key);
        sum += it != per_member[m].end() ? it->second : floor[m];
      }
      double mean = sum / static_cast<double>(members_.size());
      out.push_back({key.second, std::min(mean, 0.0), key.first});
    }
    return out;
  }

 private:
  std::vector<std::shared_ptr<const StepScorer>> members_;
  double floor_margin_;
};

}  // namespace

std::shared_ptr<const StepScorer> make_ensemble(
    std::vector<std::shared_ptr<const StepScorer>> members,
    double floor_margin) {
  if (members.empty())
    throw ConfigError("ensemble requires at least one scorer");
  for (const auto& m : members)
    if (!m) throw ConfigError("ensemble member is null");
  if (members.size() == 1) return members.front();  // exact passthrough
  return std::make_shared<EnsembleScorer>(std::move(members), floor_margin);
}

}  // namespace revforge
