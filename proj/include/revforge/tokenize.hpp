// tokenize.hpp
//
// Deterministic tokenization used by the forge and the decoder.
//
// Two modes:
//   * whitespace mode (default, zero assets): split on whitespace, then
//     split leading/trailing punctuation into separate tokens;
//   * vocab mode: greedy longest-match subword segmentation per
//     whitespace-delimited word, continuation pieces carrying the marker.
//
// Both modes are total: they never fail on any input.

#ifndef REVFORGE_TOKENIZE_HPP
#define REVFORGE_TOKENIZE_HPP

#include <regex>
#include <string>
#include <unordered_set>
#include <vector>

namespace revforge {

using Tokens = std::vector<std::string>;

// Subword vocabulary file layout: line 1 declares the continuation marker,
// every following non-empty line is one entry. Entries with the marker
// prefix are continuation pieces. Loading fails unless every printable
// ASCII character (excluding space) is present as an entry; that coverage
// is what keeps segmentation total.
class SubwordVocab {
 public:
  static SubwordVocab load(const std::string& path);
  static SubwordVocab from_entries(std::string marker,
                                   const std::vector<std::string>& entries);

  const std::string& marker() const { return marker_; }
  bool contains(const std::string& piece) const {
    return entries_.count(piece) > 0;
  }
  size_t size() const { return entries_.size(); }

 private:
  SubwordVocab() = default;
  std::string marker_;
  std::unordered_set<std::string> entries_;
};

Tokens tokenize(const std::string& text);
Tokens tokenize(const std::string& text, const SubwordVocab& vocab);

// Joins tokens with single spaces, reattaching punctuation, contraction
// pieces ("n't", "'s", ...) and marker-carrying subword continuations.
// Inverse of tokenize up to whitespace normalization on text that follows
// the attachment conventions.
std::string detokenize(const Tokens& tokens, const std::string& marker = "##");

std::string join_tokens(const Tokens& tokens);  // plain space join
Tokens split_ws(const std::string& text);       // plain whitespace split

// Ordered regex rewrite rules, applied in list order with global
// replacement. File format: one `s/pattern/replacement/` per line with
// `\/` escaping; blank lines and lines starting with '#' are skipped.
class FixupRules {
 public:
  static FixupRules load(const std::string& path);
  static FixupRules parse(const std::string& text);
  FixupRules() = default;

  std::string apply(const std::string& text) const;
  size_t size() const { return rules_.size(); }

 private:
  struct Rule {
    std::string pattern;
    std::string replacement;
    std::regex re;
  };
  std::vector<Rule> rules_;
};

}  // namespace revforge

#endif  // REVFORGE_TOKENIZE_HPP
