#include "revforge/rule_model.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "revforge/errors.hpp"

namespace revforge {

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, size_t line_no, const char* what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("rule file line " + std::to_string(line_no) + ": bad " +
                      what + " '" + s + "'");
  return v;
}

// The decoder only hands us prefixes it built from our own candidates, so
// we can re-derive where the cursor is by parsing the prefix as a monotone
// traversal of the source. Several parses can coexist (e.g. a copied token
// that also equals a rule replacement); candidates are unioned over all
// of them at the best score.
struct ParseState {
  size_t cursor = 0;      // next source position to consume
  int edits = 0;          // rule applications in the implied history
  size_t rule = SIZE_MAX; // mid-replacement rule index, SIZE_MAX if none
  size_t repl_pos = 0;    // next replacement token to emit
  double carry = 0.0;     // deletion-rule costs to charge on next emission

  bool mid_replacement() const { return rule != SIZE_MAX; }
};

}  // namespace

void RuleTable::validate() const {
  if (!(copy_cost > 0)) throw ConfigError("rule table: copy_cost must be > 0");
  if (eos_cost < 0) throw ConfigError("rule table: eos_cost must be >= 0");
  if (max_edits_per_pass < 1)
    throw ConfigError("rule table: max_edits_per_pass must be >= 1");
  std::map<std::tuple<std::string, std::string, std::string>, size_t> keys;
  for (const auto& r : rules) {
    if (!(r.cost > 0))
      throw ConfigError("rule file line " + std::to_string(r.line_no) +
                        ": cost must be > 0");
    if (r.match.empty())
      throw ConfigError("rule file line " + std::to_string(r.line_no) +
                        ": empty match token");
    auto key = std::make_tuple(r.left_ctx, r.match, r.right_ctx);
    auto [it, inserted] = keys.emplace(key, r.line_no);
    if (!inserted)
      throw ConfigError("rule file: duplicate rule key (" + r.left_ctx + ", " +
                        r.match + ", " + r.right_ctx + ") at lines " +
                        std::to_string(it->second) + " and " +
                        std::to_string(r.line_no));
  }
}

RuleTable RuleTable::parse(const std::string& text) {
  RuleTable table;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '@') {
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      std::string value;
      ls >> value;
      if (value.empty())
        throw ConfigError("rule file line " + std::to_string(line_no) +
                          ": directive " + key + " needs a value");
      if (key == "@copy_cost")
        table.copy_cost = parse_double(value, line_no, "copy_cost");
      else if (key == "@eos_cost")
        table.eos_cost = parse_double(value, line_no, "eos_cost");
      else if (key == "@max_edits_per_pass")
        table.max_edits_per_pass =
            static_cast<int>(parse_double(value, line_no, "max_edits_per_pass"));
      else
        throw ConfigError("rule file line " + std::to_string(line_no) +
                          ": unknown directive " + key);
      continue;
    }
    auto fields = split_tsv(line);
    if (fields.size() != 5)
      throw ConfigError("rule file line " + std::to_string(line_no) +
                        ": expected 5 tab-separated fields, got " +
                        std::to_string(fields.size()));
    RewriteRule r;
    r.left_ctx = fields[0];
    r.match = fields[1];
    r.replacement = fields[2] == "_" ? Tokens{} : split_ws(fields[2]);
    r.right_ctx = fields[3];
    r.cost = parse_double(fields[4], line_no, "cost");
    r.line_no = line_no;
    table.rules.push_back(std::move(r));
  }
  table.validate();
  return table;
}

RuleTable RuleTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("rule file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

RuleScorer::RuleScorer(RuleTable table) : table_(std::move(table)) {
  table_.validate();
}

std::vector<Candidate> RuleScorer::next_scores(const Tokens& source,
                                               const Tokens& prefix) const {
  const size_t n = source.size();

  auto rule_matches = [&](const RewriteRule& r, size_t cursor) {
    if (source[cursor] != r.match) return false;
    if (r.left_ctx == "^") {
      if (cursor != 0) return false;
    } else if (r.left_ctx != "_") {
      if (cursor == 0 || source[cursor - 1] != r.left_ctx) return false;
    }
    if (r.right_ctx == "$") {
      if (cursor + 1 != n) return false;
    } else if (r.right_ctx != "_") {
      if (cursor + 1 >= n || source[cursor + 1] != r.right_ctx) return false;
    }
    return true;
  };

  auto add_state = [](std::vector<ParseState>& states, ParseState s) {
    for (auto& t : states) {
      if (t.cursor == s.cursor && t.edits == s.edits && t.rule == s.rule &&
          t.repl_pos == s.repl_pos) {
        t.carry = std::min(t.carry, s.carry);
        return;
      }
    }
    states.push_back(s);
  };

  // Deletion rules consume source without emitting, so close over them.
  // Like any other rule application they escape the matched token's
  // penalty; any carry already owed stays owed.
  auto closure = [&](std::vector<ParseState>& states) {
    for (size_t i = 0; i < states.size(); ++i) {
      ParseState s = states[i];
      if (s.mid_replacement() || s.cursor >= n) continue;
      if (s.edits >= table_.max_edits_per_pass) continue;
      for (const auto& r : table_.rules) {
        if (!r.replacement.empty() || !rule_matches(r, s.cursor)) continue;
        ParseState t = s;
        ++t.cursor;
        ++t.edits;
        add_state(states, t);
      }
    }
  };

  std::vector<ParseState> states{ParseState{}};
  closure(states);
  for (const std::string& token : prefix) {
    std::vector<ParseState> next;
    for (const ParseState& s : states) {
      if (s.mid_replacement()) {
        const Tokens& repl = table_.rules[s.rule].replacement;
        if (repl[s.repl_pos] != token) continue;
        ParseState t = s;
        t.carry = 0.0;
        if (++t.repl_pos >= repl.size()) {
          t.rule = SIZE_MAX;
          t.repl_pos = 0;
        }
        add_state(next, t);
        continue;
      }
      if (s.cursor >= n) continue;
      if (source[s.cursor] == token) {
        // Copying a token some rule flags carries that rule's cost onto
        // the path's next emission; the rule path escapes the penalty.
        double penalty = 0.0;
        for (const auto& r : table_.rules)
          if (rule_matches(r, s.cursor)) penalty = std::max(penalty, r.cost);
        ParseState t = s;
        ++t.cursor;
        t.carry = penalty;
        add_state(next, t);
      }
      if (s.edits < table_.max_edits_per_pass) {
        for (size_t ri = 0; ri < table_.rules.size(); ++ri) {
          const auto& r = table_.rules[ri];
          if (r.replacement.empty() || !rule_matches(r, s.cursor)) continue;
          if (r.replacement[0] != token) continue;
          ParseState t = s;
          ++t.cursor;
          ++t.edits;
          t.carry = 0.0;
          if (r.replacement.size() > 1) {
            t.rule = ri;
            t.repl_pos = 1;
          }
          add_state(next, t);
        }
      }
    }
    closure(next);
    states = std::move(next);
    if (states.empty())
      throw DecodeError("rule model: prefix \"" + join_tokens(prefix) +
                        "\" is not a monotone traversal of the source");
  }

  // Union of candidates over all surviving parses, best score per key.
  std::map<std::pair<bool, std::string>, double> merged;
  auto offer = [&](bool eos, const std::string& token, double lp) {
    auto key = std::make_pair(eos, token);
    auto it = merged.find(key);
    if (it == merged.end() || lp > it->second) merged[key] = lp;
  };

  for (const ParseState& s : states) {
    if (s.mid_replacement()) {
      const Tokens& repl = table_.rules[s.rule].replacement;
      offer(false, repl[s.repl_pos], -(table_.copy_cost + s.carry));
      continue;
    }
    if (s.cursor >= n) {
      offer(true, "", -(table_.eos_cost + s.carry));
      continue;
    }
    offer(false, source[s.cursor], -(table_.copy_cost + s.carry));
    if (s.edits < table_.max_edits_per_pass) {
      for (const auto& r : table_.rules) {
        if (r.replacement.empty() || !rule_matches(r, s.cursor)) continue;
        offer(false, r.replacement[0], -(table_.copy_cost + s.carry));
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(merged.size());
  for (const auto& [key, lp] : merged)
    out.push_back({key.second, lp, key.first});
  return out;
}

}  // namespace revforge
