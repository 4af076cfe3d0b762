#include "revforge/markup.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "revforge/errors.hpp"

namespace revforge {

namespace {

const char* kDefaultRules = R"(# revforge markup rules, version 1
@comments
@refs
@tags
@templates
@tables
@links
s/\[[a-z]+:\/\/[^ \]]* ?([^\]]*)\]/$1/
s/^=+[ \t]*([^=].*[^=]|[^=]?)[ \t]*=+[ \t]*$/$1/
s/'''//
s/''//
@entities
@whitespace
)";

// Removes spans opened by `open` and closed by `close`, honoring nesting.
// Unbalanced openers/closers are left as literal text.
std::string remove_nested(const std::string& s, const std::string& open,
                          const std::string& close) {
  std::vector<size_t> stack;
  std::vector<std::pair<size_t, size_t>> regions;
  size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, open.size(), open) == 0) {
      stack.push_back(i);
      i += open.size();
    } else if (s.compare(i, close.size(), close) == 0 && !stack.empty()) {
      size_t begin = stack.back();
      stack.pop_back();
      i += close.size();
      if (stack.empty()) regions.emplace_back(begin, i);
    } else {
      ++i;
    }
  }
  if (regions.empty()) return s;
  std::string out;
  out.reserve(s.size());
  size_t pos = 0;
  for (auto& [b, e] : regions) {
    out.append(s, pos, b - pos);
    pos = e;
  }
  out.append(s, pos, std::string::npos);
  return out;
}

// Removes delimiter pairs like <!-- ... -->. Unterminated openers stay.
std::string remove_delimited(const std::string& s, const std::string& open,
                             const std::string& close) {
  std::string out;
  out.reserve(s.size());
  size_t pos = 0;
  while (pos < s.size()) {
    size_t b = s.find(open, pos);
    if (b == std::string::npos) break;
    size_t e = s.find(close, b + open.size());
    if (e == std::string::npos) break;
    out.append(s, pos, b - pos);
    pos = e + close.size();
  }
  out.append(s, pos, std::string::npos);
  return out;
}

std::string remove_refs(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t pos = 0;
  while (pos < s.size()) {
    size_t b = s.find("<ref", pos);
    if (b == std::string::npos) break;
    size_t gt = s.find('>', b);
    if (gt == std::string::npos) break;
    size_t end;
    if (s[gt - 1] == '/') {
      end = gt + 1;  // self-closing <ref name=x />
    } else {
      size_t close = s.find("</ref>", gt);
      if (close == std::string::npos) break;
      end = close + 6;
    }
    out.append(s, pos, b - pos);
    pos = end;
  }
  out.append(s, pos, std::string::npos);
  return out;
}

std::string strip_links(const std::string& s) {
  static const std::regex link_re(R"(\[\[(?:[^\[\]]*\|)?([^\[\]|]*)\]\])");
  std::string cur = s;
  for (int i = 0; i < 10; ++i) {
    std::string next = std::regex_replace(cur, link_re, "$1");
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::string replace_entities(const std::string& s) {
  static const std::pair<const char*, const char*> kEntities[] = {
      {"&nbsp;", " "}, {"&ndash;", "-"}, {"&mdash;", "-"}, {"&hellip;", "..."}};
  std::string out = s;
  for (auto& [from, to] : kEntities) {
    size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, std::strlen(from), to);
      pos += std::strlen(to);
    }
  }
  return out;
}

std::string squeeze_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  int newlines = 0;
  bool pending_space = false;
  for (char c : s) {
    if (c == '\n') {
      ++newlines;
      pending_space = false;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      pending_space = true;
    } else {
      if (newlines > 0) {
        if (!out.empty()) out.append(newlines > 1 ? "\n\n" : "\n");
        newlines = 0;
        pending_space = false;
      }
      if (pending_space) {
        if (!out.empty() && out.back() != '\n') out.push_back(' ');
        pending_space = false;
      }
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

MarkupRules MarkupRules::parse(const std::string& text) {
  MarkupRules rules;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    Step step;
    if (line[0] == '@') {
      if (line == "@comments")
        step.kind = Step::kComments;
      else if (line == "@refs")
        step.kind = Step::kRefs;
      else if (line == "@tags")
        step.kind = Step::kTags;
      else if (line == "@templates")
        step.kind = Step::kTemplates;
      else if (line == "@tables")
        step.kind = Step::kTables;
      else if (line == "@links")
        step.kind = Step::kLinks;
      else if (line == "@entities")
        step.kind = Step::kEntities;
      else if (line == "@whitespace")
        step.kind = Step::kWhitespace;
      else
        throw ConfigError("markup rules line " + std::to_string(line_no) +
                          ": unknown directive " + line);
    } else if (line.compare(0, 2, "s/") == 0) {
      step.kind = Step::kRegex;
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
        throw ConfigError("markup rules line " + std::to_string(line_no) +
                          ": unterminated rule");
      step.pattern = parts[0];
      step.replacement = parts[1];
      try {
        step.re = std::regex(step.pattern,
                             std::regex::ECMAScript | std::regex::multiline);
      } catch (const std::regex_error& e) {
        throw ConfigError("markup rules line " + std::to_string(line_no) +
                          ": bad pattern: " + e.what());
      }
    } else {
      throw ConfigError("markup rules line " + std::to_string(line_no) +
                        ": expected directive or s/pattern/replacement/");
    }
    rules.steps_.push_back(std::move(step));
  }
  return rules;
}

MarkupRules MarkupRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("markup rules: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const MarkupRules& MarkupRules::defaults() {
  static const MarkupRules rules = parse(kDefaultRules);
  return rules;
}

std::string MarkupRules::strip(const std::string& raw) const {
  // Removing one construct can expose another to an earlier pass (deleting
  // a table can juxtapose template braces), so run the pass list to a
  // fixpoint. Every pass is length-nonincreasing, so this terminates.
  std::string s = raw;
  for (int round = 0; round < 32; ++round) {
    std::string before = s;
    s = strip_once(s);
    if (s == before) break;
  }
  return s;
}

std::string MarkupRules::strip_once(const std::string& raw) const {
  std::string s = raw;
  for (const auto& step : steps_) {
    switch (step.kind) {
      case Step::kComments:
        s = remove_delimited(s, "<!--", "-->");
        break;
      case Step::kRefs:
        s = remove_refs(s);
        break;
      case Step::kTags: {
        static const std::regex tag_re(R"(<\/?[A-Za-z][^<>]*>)");
        s = std::regex_replace(s, tag_re, "");
        break;
      }
      case Step::kTemplates:
        s = remove_nested(s, "{{", "}}");
        break;
      case Step::kTables:
        s = remove_nested(s, "{|", "|}");
        break;
      case Step::kLinks:
        s = strip_links(s);
        break;
      case Step::kEntities:
        s = replace_entities(s);
        break;
      case Step::kWhitespace:
        s = squeeze_whitespace(s);
        break;
      case Step::kRegex:
        s = std::regex_replace(s, step.re, step.replacement);
        break;
    }
  }
  return s;
}

std::string strip_markup(const std::string& raw) {
  return MarkupRules::defaults().strip(raw);
}

}  // namespace revforge
