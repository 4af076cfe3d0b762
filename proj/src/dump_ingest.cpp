#include "revforge/dump_ingest.hpp"

#include <algorithm>
#include <cstdlib>

#include "revforge/errors.hpp"
#include "revforge/rng.hpp"

namespace revforge {

namespace {

constexpr size_t kReadChunk = 1 << 20;

bool tag_boundary(char c) {
  return c == '>' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

// Returns the inner text of the first <tag ...>...</tag> element in
// s[from, to), or nullopt. Self-closing elements yield an empty string.
std::optional<std::string> find_element(const std::string& s, size_t from,
                                        size_t to, const std::string& tag) {
  const std::string open = "<" + tag;
  size_t b = from;
  while (true) {
    b = s.find(open, b);
    if (b == std::string::npos || b >= to) return std::nullopt;
    if (b + open.size() < to && tag_boundary(s[b + open.size()])) break;
    b += open.size();
  }
  size_t gt = s.find('>', b);
  if (gt == std::string::npos || gt >= to) return std::nullopt;
  if (s[gt - 1] == '/') return std::string();
  const std::string close = "</" + tag + ">";
  size_t e = s.find(close, gt + 1);
  if (e == std::string::npos || e > to) return std::nullopt;
  return s.substr(gt + 1, e - gt - 1);
}

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct RawRevision {
  std::string timestamp;
  std::string text;
};

std::optional<PageSeries> parse_page(const std::string& region) {
  size_t first_rev = region.find("<revision");
  size_t head_end = first_rev == std::string::npos ? region.size() : first_rev;

  auto title = find_element(region, 0, head_end, "title");
  if (!title) return std::nullopt;
  auto id_text = find_element(region, 0, head_end, "id");
  if (!id_text) return std::nullopt;
  char* end = nullptr;
  long long page_id = std::strtoll(id_text->c_str(), &end, 10);
  if (end == id_text->c_str()) return std::nullopt;

  std::vector<RawRevision> revs;
  size_t pos = first_rev;
  while (pos != std::string::npos && pos < region.size()) {
    size_t rb = region.find("<revision", pos);
    if (rb == std::string::npos) break;
    size_t re = region.find("</revision>", rb);
    if (re == std::string::npos) break;
    re += 11;
    auto text = find_element(region, rb, re, "text");
    if (text) {
      auto ts = find_element(region, rb, re, "timestamp");
      revs.push_back({ts ? xml_unescape(*ts) : std::string(),
                      xml_unescape(*text)});
    }
    pos = re;
  }
  if (revs.empty()) return std::nullopt;

  // Chronological order; stable so timestamp ties keep dump order.
  std::stable_sort(revs.begin(), revs.end(),
                   [](const RawRevision& a, const RawRevision& b) {
                     return a.timestamp < b.timestamp;
                   });

  PageSeries series;
  series.page_id = page_id;
  series.title = xml_unescape(*title);
  series.byte_size = region.size();
  series.snapshots.reserve(revs.size());
  for (auto& r : revs) series.snapshots.push_back(std::move(r.text));
  return series;
}

}  // namespace

std::string xml_unescape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    size_t semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "lt")
      out.push_back('<');
    else if (ent == "gt")
      out.push_back('>');
    else if (ent == "amp")
      out.push_back('&');
    else if (ent == "quot")
      out.push_back('"');
    else if (ent == "apos")
      out.push_back('\'');
    else if (ent.size() > 1 && ent[0] == '#') {
      uint32_t cp = 0;
      bool ok = false;
      if (ent[1] == 'x' || ent[1] == 'X')
        cp = static_cast<uint32_t>(std::strtoul(ent.c_str() + 2, nullptr, 16)),
        ok = ent.size() > 2;
      else
        cp = static_cast<uint32_t>(std::strtoul(ent.c_str() + 1, nullptr, 10)),
        ok = true;
      if (!ok || cp == 0 || cp > 0x10FFFF) {
        out.push_back(s[i++]);
        continue;
      }
      append_utf8(out, cp);
    } else {
      out.push_back(s[i++]);
      continue;
    }
    i = semi + 1;
  }
  return out;
}

void DumpReader::read_chunk() {
  size_t old = buf_.size();
  buf_.resize(old + kReadChunk);
  in_.read(buf_.data() + old, static_cast<std::streamsize>(kReadChunk));
  size_t got = static_cast<size_t>(in_.gcount());
  buf_.resize(old + got);
  if (got == 0) eof_ = true;
}

bool DumpReader::ensure(size_t size) {
  while (buf_.size() < size && !eof_) read_chunk();
  return buf_.size() >= size;
}

bool DumpReader::fill_until(const std::string& needle, size_t from,
                            size_t* pos) {
  while (true) {
    size_t p = buf_.find(needle, from);
    if (p != std::string::npos) {
      *pos = p;
      return true;
    }
    if (eof_) return false;
    // Matches can straddle the old buffer end; back up by one needle.
    size_t resume = buf_.size() >= needle.size()
                        ? buf_.size() - needle.size() + 1
                        : 0;
    if (resume > from) from = resume;
    read_chunk();
  }
}

std::optional<PageSeries> DumpReader::next() {
  while (true) {
    if (truncated_) return std::nullopt;
    size_t open = scan_;
    while (true) {
      if (!fill_until("<page", open, &open)) return std::nullopt;
      if (!ensure(open + 6)) {
        truncated_ = true;  // "<page" right at end of stream
        return std::nullopt;
      }
      if (tag_boundary(buf_[open + 5])) break;
      open += 5;  // e.g. "<pages>", keep scanning
    }
    size_t close;
    if (!fill_until("</page>", open, &close)) {
      truncated_ = true;  // stream ended inside a page region
      return std::nullopt;
    }
    size_t end = close + 7;
    ++pages_read_;
    std::string region = buf_.substr(open, end - open);
    buf_.erase(0, end);
    scan_ = 0;
    auto series = parse_page(region);
    if (series) return series;
    ++pages_skipped_;
  }
}

void IngestConfig::validate() const {
  std::string errs;
  if (max_page_bytes == 0) errs += "max_page_bytes must be > 0; ";
  if (!(downsample_base > 1.0)) errs += "downsample_base must be > 1; ";
  if (!errs.empty()) throw ConfigError("ingest config: " + errs);
}

std::optional<PageSeries> filter_page(PageSeries series,
                                      const IngestConfig& cfg) {
  cfg.validate();
  if (series.byte_size <= cfg.max_page_bytes) return series;
  return std::nullopt;
}

size_t downsample_pair_count(size_t snapshot_count, double base) {
  if (!(base > 1.0)) throw ConfigError("downsample base must be > 1");
  if (snapshot_count <= 1) return 0;
  size_t k = 0;
  double p = 1.0;
  while (p * base <= static_cast<double>(snapshot_count)) {
    p *= base;
    ++k;
  }
  return std::min(snapshot_count - 1, k);
}

std::vector<SnapshotPair> downsample_snapshots(const PageSeries& series,
                                               const IngestConfig& cfg) {
  cfg.validate();
  const size_t x = series.snapshots.size();
  const size_t k = downsample_pair_count(x, cfg.downsample_base);
  std::vector<SnapshotPair> out;
  if (k == 0) return out;

  std::vector<size_t> idx(x - 1);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMix64 rng(derive_seed(cfg.seed, {static_cast<uint64_t>(series.page_id)}));
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  out.reserve(k);
  for (size_t p : idx)
    out.push_back({series.snapshots[p], series.snapshots[p + 1],
                   series.page_id, static_cast<int64_t>(p)});
  return out;
}

}  // namespace revforge
