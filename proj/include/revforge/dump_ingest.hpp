// dump_ingest.hpp
//
// Streams pages out of a revision-history XML dump, drops oversized pages
// and picks consecutive snapshot pairs by logarithmic downsampling.
//
// The reader is deliberately not a full MediaWiki parser: it scans page
// regions, pulls title/id/revision(timestamp, text) out of each and skips
// anything malformed at page granularity, counting the skips.

#ifndef REVFORGE_DUMP_INGEST_HPP
#define REVFORGE_DUMP_INGEST_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace revforge {

struct PageSeries {
  int64_t page_id = 0;
  std::string title;
  uint64_t byte_size = 0;  // bytes of the page's serialized region in the dump
  std::vector<std::string> snapshots;  // revision texts, chronological
};

struct IngestConfig {
  uint64_t max_page_bytes = 64ull << 20;  // inclusive bound
  double downsample_base = 1.5;
  uint64_t seed = 0;

  void validate() const;
};

struct SnapshotPair {
  std::string source_raw;  // earlier snapshot
  std::string target_raw;  // later snapshot
  int64_t page_id = 0;
  int64_t pair_index = 0;  // index of the (i, i+1) consecutive pair
};

struct IngestStats {
  uint64_t pages_read = 0;
  uint64_t pages_kept = 0;
  uint64_t pages_skipped = 0;
  uint64_t pairs_emitted = 0;
  bool truncated = false;
};

class DumpReader {
 public:
  explicit DumpReader(std::istream& in) : in_(in) {}

  // Next well-formed page, or nullopt at end of stream. Malformed pages are
  // skipped and counted; a stream that ends inside a page region sets
  // truncated() and ends iteration.
  std::optional<PageSeries> next();

  uint64_t pages_read() const { return pages_read_; }
  uint64_t pages_skipped() const { return pages_skipped_; }
  bool truncated() const { return truncated_; }

 private:
  void read_chunk();
  bool ensure(size_t size);
  bool fill_until(const std::string& needle, size_t from, size_t* pos);

  std::istream& in_;
  std::string buf_;
  size_t scan_ = 0;
  uint64_t pages_read_ = 0;
  uint64_t pages_skipped_ = 0;
  bool truncated_ = false;
  bool eof_ = false;
};

// Keeps the series iff byte_size <= max_page_bytes (inclusive bound).
std::optional<PageSeries> filter_page(PageSeries series, const IngestConfig& cfg);

// min(X - 1, floor(log_base(X))) for X snapshots, computed by exact power
// iteration so boundary page sizes do not wobble on floating-point error.
size_t downsample_pair_count(size_t snapshot_count, double base);

// Uniform without-replacement choice among the X-1 consecutive pairs,
// seeded per page with derive_seed(cfg.seed, {page_id}); output sorted by
// pair_index.
std::vector<SnapshotPair> downsample_snapshots(const PageSeries& series,
                                               const IngestConfig& cfg);

// XML entity unescaping for text nodes (&lt; &gt; &amp; &quot; &apos;
// and numeric forms).
std::string xml_unescape(const std::string& s);

}  // namespace revforge

#endif  // REVFORGE_DUMP_INGEST_HPP
