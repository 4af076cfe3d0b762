#include "revforge/tokenize.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "revforge/errors.hpp"

namespace revforge {

namespace {

// Punctuation peeled off token edges in whitespace mode. Apostrophe and
// double quote are peeled from the trailing edge only; word-internal
// characters (don't, U.S.A, well-known) are never touched.
const std::string kLeadPeel = "([{";
const std::string kTrailPeel = ")]}.,!?;:%'\"";

// Tokens written without a preceding space by detokenize.
const std::string kClosers = ".,!?;:)]}%'\"";
const std::string kOpeners = "([{";

bool all_chars_in(const std::string& s, const std::string& set) {
  if (s.empty()) return false;
  for (char c : s)
    if (set.find(c) == std::string::npos) return false;
  return true;
}

bool is_contraction_piece(const std::string& t) {
  if (t == "n't") return true;
  if (t.size() >= 2 && t[0] == '\'') {
    for (size_t i = 1; i < t.size(); ++i)
      if (!std::isalpha(static_cast<unsigned char>(t[i]))) return false;
    return true;
  }
  return false;
}

}  // namespace

Tokens split_ws(const std::string& text) {
  Tokens out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Tokens tokenize(const std::string& text) {
  Tokens out;
  for (auto& word : split_ws(text)) {
    size_t begin = 0, end = word.size();
    size_t lead = 0;
    while (begin < end && kLeadPeel.find(word[begin]) != std::string::npos) {
      ++begin;
      ++lead;
    }
    size_t trail = 0;
    while (end > begin && kTrailPeel.find(word[end - 1]) != std::string::npos) {
      --end;
      ++trail;
    }
    for (size_t i = 0; i < lead; ++i) out.push_back(std::string(1, word[i]));
    if (end > begin) out.push_back(word.substr(begin, end - begin));
    for (size_t i = 0; i < trail; ++i)
      out.push_back(std::string(1, word[end + i]));
  }
  return out;
}

namespace {

// Byte length of the UTF-8 sequence starting at s[pos] (1 for invalid).
size_t utf8_len_at(const std::string& s, size_t pos) {
  unsigned char c = static_cast<unsigned char>(s[pos]);
  size_t len = 1;
  if ((c & 0xE0) == 0xC0) len = 2;
  else if ((c & 0xF0) == 0xE0) len = 3;
  else if ((c & 0xF8) == 0xF0) len = 4;
  if (pos + len > s.size()) return 1;
  for (size_t k = 1; k < len; ++k)
    if ((static_cast<unsigned char>(s[pos + k]) & 0xC0) != 0x80) return 1;
  return len;
}

}  // namespace

Tokens tokenize(const std::string& text, const SubwordVocab& vocab) {
  Tokens out;
  const std::string& marker = vocab.marker();
  for (auto& word : split_ws(text)) {
    size_t pos = 0;
    while (pos < word.size()) {
      size_t len = word.size() - pos;
      std::string piece;
      for (; len >= 1; --len) {
        std::string sub = word.substr(pos, len);
        std::string keyed = pos > 0 ? marker + sub : sub;
        if (vocab.contains(keyed)) {
          piece = std::move(keyed);
          break;
        }
      }
      if (piece.empty()) {
        // Out-of-alphabet character; emit the whole UTF-8 sequence as its
        // own piece so segmentation stays total and reconstructible.
        len = utf8_len_at(word, pos);
        piece = (pos > 0 ? marker : std::string()) + word.substr(pos, len);
      }
      out.push_back(std::move(piece));
      pos += len;
    }
  }
  return out;
}

std::string detokenize(const Tokens& tokens, const std::string& marker) {
  std::string out;
  bool prev_opener = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    bool continuation = !marker.empty() && t.size() > marker.size() &&
                        t.compare(0, marker.size(), marker) == 0;
    bool attach = continuation || all_chars_in(t, kClosers) ||
                  is_contraction_piece(t) || prev_opener;
    if (i > 0 && !attach) out.push_back(' ');
    out += continuation ? t.substr(marker.size()) : t;
    prev_opener = all_chars_in(t, kOpeners);
  }
  return out;
}

SubwordVocab SubwordVocab::from_entries(std::string marker,
                                        const std::vector<std::string>& entries) {
  SubwordVocab v;
  v.marker_ = std::move(marker);
  if (v.marker_.empty())
    throw ConfigError("vocab: continuation marker must be non-empty");
  for (const auto& e : entries) {
    if (e.empty()) continue;
    if (!v.entries_.insert(e).second)
      throw ConfigError("vocab: duplicate entry '" + e + "'");
  }
  std::string missing;
  for (int c = 33; c < 127; ++c) {
    if (!v.entries_.count(std::string(1, static_cast<char>(c))))
      missing.push_back(static_cast<char>(c));
  }
  if (!missing.empty())
    throw ConfigError("vocab: missing single-character entries: " + missing);
  return v;
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("vocab: cannot open " + path);
  std::string marker;
  if (!std::getline(in, marker))
    throw ConfigError("vocab: empty file " + path);
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    entries.push_back(line);
  }
  return from_entries(marker, entries);
}

FixupRules FixupRules::parse(const std::string& text) {
  FixupRules rules;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.size() < 4 || line.compare(0, 2, "s/") != 0)
      throw ConfigError("fixups line " + std::to_string(line_no) +
                        ": expected s/pattern/replacement/");
    std::string parts[2];
    size_t part = 0;
    size_t i = 2;
    for (; i < line.size() && part < 2; ++i) {
      char c = line[i];
      if (c == '\\' && i + 1 < line.size() && line[i + 1] == '/') {
        parts[part].push_back('/');
        ++i;
      } else if (c == '/') {
        ++part;
      } else {
        parts[part].push_back(c);
      }
    }
    if (part != 2)
      throw ConfigError("fixups line " + std::to_string(line_no) +
                        ": unterminated rule");
    for (; i < line.size(); ++i)
      if (!std::isspace(static_cast<unsigned char>(line[i])))
        throw ConfigError("fixups line " + std::to_string(line_no) +
                          ": trailing characters after rule");
    Rule r;
    r.pattern = parts[0];
    r.replacement = parts[1];
    try {
      r.re = std::regex(r.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigError("fixups line " + std::to_string(line_no) +
                        ": bad pattern: " + e.what());
    }
    rules.rules_.push_back(std::move(r));
  }
  return rules;
}

FixupRules FixupRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fixups: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string FixupRules::apply(const std::string& text) const {
  std::string out = text;
  for (const auto& r : rules_) out = std::regex_replace(out, r.re, r.replacement);
  return out;
}

}  // namespace revforge
