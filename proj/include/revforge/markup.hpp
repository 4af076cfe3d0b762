// markup.hpp
//
// Best-effort wiki markup stripping: a fixed, ordered list of passes rather
// than a full wikitext grammar. Unbalanced markup degrades to literal text
// and stripping is idempotent.
//
// Rule file format (one step per line, executed in file order):
//   @comments @refs @tags @templates @tables @links @entities @whitespace
//   s/pattern/replacement/      (regex step, multiline, global)
//   # comment
// The shipped default rule list lives in assets/markup_rules.txt and is
// identical to MarkupRules::defaults().

#ifndef REVFORGE_MARKUP_HPP
#define REVFORGE_MARKUP_HPP

#include <regex>
#include <string>
#include <vector>

namespace revforge {

class MarkupRules {
 public:
  static MarkupRules load(const std::string& path);
  static MarkupRules parse(const std::string& text);
  static const MarkupRules& defaults();

  std::string strip(const std::string& raw) const;
  size_t size() const { return steps_.size(); }

 private:
  MarkupRules() = default;
  std::string strip_once(const std::string& raw) const;
  struct Step {
    enum Kind {
      kComments,
      kRefs,
      kTags,
      kTemplates,
      kTables,
      kLinks,
      kEntities,
      kWhitespace,
      kRegex
    } kind;
    std::string pattern, replacement;
    std::regex re;
  };
  std::vector<Step> steps_;
};

// Strips with the default rule list.
std::string strip_markup(const std::string& raw);

}  // namespace revforge

#endif  // REVFORGE_MARKUP_HPP
