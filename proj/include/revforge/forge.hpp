// forge.hpp
//
// Turns snapshot pairs into example pairs: strip markup, align, extract
// bounded-length examples around the mismatching regions, window the
// untouched matching text into identity examples, inject synthetic
// spelling noise on the source side and downsample identities.
//
// Every operation is pure given (input, seed); per-example randomness is
// derived from (seed, page_id, pair_index, segment_index), so output is
// byte-identical across worker counts and scheduling orders.

#ifndef REVFORGE_FORGE_HPP
#define REVFORGE_FORGE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revforge/align.hpp"
#include "revforge/dump_ingest.hpp"
#include "revforge/markup.hpp"
#include "revforge/rng.hpp"
#include "revforge/tokenize.hpp"

namespace revforge {

struct ExamplePair {
  Tokens source_tokens;
  Tokens target_tokens;
  bool is_identity = false;
  int64_t page_id = 0;
  int64_t pair_index = 0;
  int64_t segment_index = 0;
};

struct ExtractConfig {
  size_t max_len = 256;           // token cap per side
  double identity_keep_prob = 0.01;
  double target_identity_fraction = 0.038;  // informational only
  size_t min_anchor_tokens = 2;
  uint64_t seed = 0;

  void validate() const;
};

struct NoiseSpec {
  double rate = 0.003;  // per character
  double w_delete = 1.0, w_insert = 1.0, w_replace = 1.0, w_transpose = 1.0;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";
  uint64_t seed = 0;

  void validate() const;
};

struct NoiseStats {
  uint64_t chars = 0;
  uint64_t triggered = 0;
  uint64_t deletes = 0, inserts = 0, replaces = 0, transposes = 0;

  NoiseStats& operator+=(const NoiseStats& o);
};

struct ExtractStats {
  uint64_t emitted = 0;
  uint64_t identity_emitted = 0;
  uint64_t overlength_dropped = 0;

  ExtractStats& operator+=(const ExtractStats& o);
};

// Examples around each mismatch region: the region itself plus flanking
// match context grown while both sides stay <= max_len. Match text not
// consumed as context becomes identity examples in max_len windows.
// Regions whose minimal span exceeds max_len on either side are dropped
// and counted.
std::vector<ExamplePair> extract_examples(const Tokens& src, const Tokens& tgt,
                                          const std::vector<AlignmentChunk>& chunks,
                                          const ExtractConfig& cfg,
                                          ExtractStats* stats = nullptr);

// Character-level noise on the detokenized string: each character position
// independently triggers with probability rate; a triggered position draws
// delete / insert-before / replace / transpose-with-next by op weight
// (transpose is a no-op at the final position). Operates on UTF-8
// codepoints. Only ever applied to the source side.
std::string inject_noise_chars(const std::string& text, const NoiseSpec& spec,
                               SplitMix64& rng, NoiseStats* stats = nullptr);
Tokens inject_noise(const Tokens& source, const NoiseSpec& spec,
                    SplitMix64& rng, NoiseStats* stats = nullptr,
                    const SubwordVocab* vocab = nullptr);

// Non-identity examples always pass; identity examples pass with
// probability identity_keep_prob, decided by the example's derived stream.
bool keep_identity(const ExamplePair& ex, const ExtractConfig& cfg);
std::vector<ExamplePair> downsample_identities(std::vector<ExamplePair> examples,
                                               const ExtractConfig& cfg,
                                               uint64_t* dropped = nullptr);

// Full per-pair pipeline.
enum class NoiseOrder {
  kPreAlign,     // noise the whole source snapshot, then align (default)
  kPostExtract,  // align clean, noise each extracted example's source
};

struct ForgeConfig {
  ExtractConfig extract;
  NoiseSpec noise;
  NoiseOrder noise_order = NoiseOrder::kPreAlign;
  const SubwordVocab* vocab = nullptr;      // null: whitespace tokenizer
  const MarkupRules* markup = nullptr;      // null: default rule list
};

struct ForgeStats {
  uint64_t pairs_read = 0;
  uint64_t examples_emitted = 0;
  uint64_t identity_emitted = 0;
  uint64_t identity_dropped = 0;
  uint64_t overlength_dropped = 0;
  NoiseStats noise;

  ForgeStats& operator+=(const ForgeStats& o);
};

std::vector<ExamplePair> forge_pair(const SnapshotPair& pair,
                                    const ForgeConfig& cfg,
                                    ForgeStats* stats = nullptr);

}  // namespace revforge

#endif  // REVFORGE_FORGE_HPP
