#include "revforge/forge.hpp"

#include <algorithm>

#include "revforge/errors.hpp"

namespace revforge {

namespace {

constexpr uint64_t kNoiseSalt = 0x6e6f697365ull;      // "noise"
constexpr uint64_t kIdentitySalt = 0x6964656e74ull;   // "ident"

// Lenient UTF-8 split; invalid lead/continuation bytes become single-byte
// characters so noise never corrupts what was already valid.
std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t len = 1;
    if ((c & 0xE0) == 0xC0)
      len = 2;
    else if ((c & 0xF0) == 0xE0)
      len = 3;
    else if ((c & 0xF8) == 0xF0)
      len = 4;
    if (i + len > s.size()) len = 1;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

enum class NoiseOp { kDelete, kInsert, kReplace, kTranspose };

NoiseOp draw_op(const NoiseSpec& spec, SplitMix64& rng) {
  double total = spec.w_delete + spec.w_insert + spec.w_replace + spec.w_transpose;
  double r = rng.uniform() * total;
  if ((r -= spec.w_delete) < 0) return NoiseOp::kDelete;
  if ((r -= spec.w_insert) < 0) return NoiseOp::kInsert;
  if ((r -= spec.w_replace) < 0) return NoiseOp::kReplace;
  return NoiseOp::kTranspose;
}

}  // namespace

void ExtractConfig::validate() const {
  std::string errs;
  if (max_len < 1) errs += "max_len must be >= 1; ";
  if (identity_keep_prob < 0.0 || identity_keep_prob > 1.0)
    errs += "identity_keep_prob must be in [0, 1]; ";
  if (min_anchor_tokens < 1) errs += "min_anchor_tokens must be >= 1; ";
  if (!errs.empty()) throw ConfigError("extract config: " + errs);
}

void NoiseSpec::validate() const {
  std::string errs;
  if (rate < 0.0 || rate > 1.0) errs += "rate must be in [0, 1]; ";
  if (w_delete < 0 || w_insert < 0 || w_replace < 0 || w_transpose < 0)
    errs += "op weights must be nonnegative; ";
  if (w_delete + w_insert + w_replace + w_transpose <= 0.0)
    errs += "op weights must not all be zero; ";
  if (alphabet.empty() && (w_insert > 0 || w_replace > 0))
    errs += "alphabet must be non-empty for insert/replace; ";
  if (!errs.empty()) throw ConfigError("noise spec: " + errs);
}

NoiseStats& NoiseStats::operator+=(const NoiseStats& o) {
  chars += o.chars;
  triggered += o.triggered;
  deletes += o.deletes;
  inserts += o.inserts;
  replaces += o.replaces;
  transposes += o.transposes;
  return *this;
}

ExtractStats& ExtractStats::operator+=(const ExtractStats& o) {
  emitted += o.emitted;
  identity_emitted += o.identity_emitted;
  overlength_dropped += o.overlength_dropped;
  return *this;
}

ForgeStats& ForgeStats::operator+=(const ForgeStats& o) {
  pairs_read += o.pairs_read;
  examples_emitted += o.examples_emitted;
  identity_emitted += o.identity_emitted;
  identity_dropped += o.identity_dropped;
  overlength_dropped += o.overlength_dropped;
  noise += o.noise;
  return *this;
}

std::string inject_noise_chars(const std::string& text, const NoiseSpec& spec,
                               SplitMix64& rng, NoiseStats* stats) {
  spec.validate();
  std::vector<std::string> chars = utf8_chars(text);
  auto alpha = utf8_chars(spec.alphabet);
  std::string out;
  out.reserve(text.size());
  NoiseStats local;
  local.chars = chars.size();
  for (size_t i = 0; i < chars.size(); ++i) {
    if (rng.uniform() >= spec.rate) {
      out += chars[i];
      continue;
    }
    ++local.triggered;
    switch (draw_op(spec, rng)) {
      case NoiseOp::kDelete:
        ++local.deletes;
        break;
      case NoiseOp::kInsert:
        ++local.inserts;
        out += alpha[rng.below(alpha.size())];
        out += chars[i];
        break;
      case NoiseOp::kReplace:
        ++local.replaces;
        out += alpha[rng.below(alpha.size())];
        break;
      case NoiseOp::kTranspose:
        ++local.transposes;
        if (i + 1 < chars.size()) std::swap(chars[i], chars[i + 1]);
        out += chars[i];  // no-op at the final position
        break;
    }
  }
  if (stats) *stats += local;
  return out;
}

Tokens inject_noise(const Tokens& source, const NoiseSpec& spec,
                    SplitMix64& rng, NoiseStats* stats,
                    const SubwordVocab* vocab) {
  std::string text = detokenize(source, vocab ? vocab->marker() : "##");
  std::string noised = inject_noise_chars(text, spec, rng, stats);
  return vocab ? tokenize(noised, *vocab) : tokenize(noised);
}

std::vector<ExamplePair> extract_examples(const Tokens& src, const Tokens& tgt,
                                          const std::vector<AlignmentChunk>& chunks,
                                          const ExtractConfig& cfg,
                                          ExtractStats* stats) {
  cfg.validate();
  const size_t n = chunks.size();

  auto is_mismatch = [&](size_t i) {
    return i < n && chunks[i].kind == ChunkKind::kMismatch;
  };

  // Phase 1: grow each mismatch region into the flanking matches. A match
  // between two mismatches is split at the middle: the left one may claim
  // its prefix, the right one its suffix.
  struct Grown {
    bool kept = false;
    size_t src_begin, src_end, tgt_begin, tgt_end;
  };
  std::vector<Grown> grown(n);
  std::vector<size_t> prefix_used(n, 0), suffix_used(n, 0);
  ExtractStats local;

  for (size_t c = 0; c < n; ++c) {
    if (!is_mismatch(c)) continue;
    const AlignmentChunk& m = chunks[c];
    if (m.src_len() > cfg.max_len || m.tgt_len() > cfg.max_len) {
      ++local.overlength_dropped;
      continue;
    }
    size_t avail_left = 0, avail_right = 0;
    if (c > 0 && chunks[c - 1].kind == ChunkKind::kMatch) {
      size_t len = chunks[c - 1].src_len();
      avail_left = (c >= 2 && is_mismatch(c - 2)) ? len - len / 2 : len;
    }
    if (c + 1 < n && chunks[c + 1].kind == ChunkKind::kMatch) {
      size_t len = chunks[c + 1].src_len();
      avail_right = is_mismatch(c + 2) ? len / 2 : len;
    }
    size_t slack = cfg.max_len - std::max(m.src_len(), m.tgt_len());
    size_t g_l = std::min(avail_left, (slack + 1) / 2);
    size_t g_r = std::min(avail_right, slack - g_l);
    g_l = std::min(avail_left, slack - g_r);

    Grown g;
    g.kept = true;
    g.src_begin = m.src_begin - g_l;
    g.src_end = m.src_end + g_r;
    g.tgt_begin = m.tgt_begin - g_l;
    g.tgt_end = m.tgt_end + g_r;
    grown[c] = g;
    if (g_l > 0) suffix_used[c - 1] = g_l;
    if (g_r > 0) prefix_used[c + 1] = g_r;
  }

  // Phase 2: emit in order; leftover match text becomes identity windows.
  std::vector<ExamplePair> out;
  int64_t segment = 0;
  auto emit = [&](size_t sb, size_t se, size_t tb, size_t te) {
    ExamplePair ex;
    ex.source_tokens.assign(src.begin() + sb, src.begin() + se);
    ex.target_tokens.assign(tgt.begin() + tb, tgt.begin() + te);
    ex.is_identity = ex.source_tokens == ex.target_tokens;
    ex.segment_index = segment++;
    ++local.emitted;
    if (ex.is_identity) ++local.identity_emitted;
    out.push_back(std::move(ex));
  };

  for (size_t c = 0; c < n; ++c) {
    const AlignmentChunk& ch = chunks[c];
    if (ch.kind == ChunkKind::kMismatch) {
      if (grown[c].kept)
        emit(grown[c].src_begin, grown[c].src_end, grown[c].tgt_begin,
             grown[c].tgt_end);
      continue;
    }
    size_t begin = ch.src_begin + prefix_used[c];
    size_t end = ch.src_end - suffix_used[c];
    ptrdiff_t toff = static_cast<ptrdiff_t>(ch.tgt_begin) -
                     static_cast<ptrdiff_t>(ch.src_begin);
    for (size_t w = begin; w < end; w += cfg.max_len) {
      size_t we = std::min(w + cfg.max_len, end);
      emit(w, we, static_cast<size_t>(static_cast<ptrdiff_t>(w) + toff),
           static_cast<size_t>(static_cast<ptrdiff_t>(we) + toff));
    }
  }

  if (stats) *stats += local;
  return out;
}

bool keep_identity(const ExamplePair& ex, const ExtractConfig& cfg) {
  SplitMix64 rng(derive_seed(cfg.seed, {static_cast<uint64_t>(ex.page_id),
                                        static_cast<uint64_t>(ex.pair_index),
                                        static_cast<uint64_t>(ex.segment_index),
                                        kIdentitySalt}));
  return rng.uniform() < cfg.identity_keep_prob;
}

std::vector<ExamplePair> downsample_identities(std::vector<ExamplePair> examples,
                                               const ExtractConfig& cfg,
                                               uint64_t* dropped) {
  cfg.validate();
  std::vector<ExamplePair> out;
  out.reserve(examples.size());
  for (auto& ex : examples) {
    if (!ex.is_identity || keep_identity(ex, cfg)) {
      out.push_back(std::move(ex));
    } else if (dropped) {
      ++*dropped;
    }
  }
  return out;
}

std::vector<ExamplePair> forge_pair(const SnapshotPair& pair,
                                    const ForgeConfig& cfg,
                                    ForgeStats* stats) {
  cfg.extract.validate();
  cfg.noise.validate();
  const MarkupRules& markup = cfg.markup ? *cfg.markup : MarkupRules::defaults();
  ForgeStats local;
  local.pairs_read = 1;

  const uint64_t page = static_cast<uint64_t>(pair.page_id);
  const uint64_t pidx = static_cast<uint64_t>(pair.pair_index);

  std::string src_text = markup.strip(pair.source_raw);
  std::string tgt_text = markup.strip(pair.target_raw);
  Tokens src = cfg.vocab ? tokenize(src_text, *cfg.vocab) : tokenize(src_text);
  Tokens tgt = cfg.vocab ? tokenize(tgt_text, *cfg.vocab) : tokenize(tgt_text);

  if (cfg.noise_order == NoiseOrder::kPreAlign && cfg.noise.rate > 0) {
    SplitMix64 rng(derive_seed(cfg.noise.seed, {page, pidx, kNoiseSalt}));
    src = inject_noise(src, cfg.noise, rng, &local.noise, cfg.vocab);
  }

  auto chunks = align_texts(src, tgt, cfg.extract.min_anchor_tokens);
  ExtractStats es;
  std::vector<ExamplePair> examples =
      extract_examples(src, tgt, chunks, cfg.extract, &es);
  local.overlength_dropped += es.overlength_dropped;
  for (auto& ex : examples) {
    ex.page_id = pair.page_id;
    ex.pair_index = pair.pair_index;
  }

  if (cfg.noise_order == NoiseOrder::kPostExtract && cfg.noise.rate > 0) {
    std::vector<ExamplePair> kept;
    kept.reserve(examples.size());
    for (auto& ex : examples) {
      SplitMix64 rng(derive_seed(
          cfg.noise.seed,
          {page, pidx, static_cast<uint64_t>(ex.segment_index), kNoiseSalt}));
      ex.source_tokens =
          inject_noise(ex.source_tokens, cfg.noise, rng, &local.noise, cfg.vocab);
      if (ex.source_tokens.size() > cfg.extract.max_len) {
        ++local.overlength_dropped;
        continue;
      }
      ex.is_identity = ex.source_tokens == ex.target_tokens;
      kept.push_back(std::move(ex));
    }
    examples = std::move(kept);
  }

  examples = downsample_identities(std::move(examples), cfg.extract,
                                   &local.identity_dropped);
  local.examples_emitted = examples.size();
  for (const auto& ex : examples)
    if (ex.is_identity) ++local.identity_emitted;

  if (stats) *stats += local;
  return examples;
}

}  // namespace revforge
