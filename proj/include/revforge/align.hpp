// align.hpp
//
// Token-level alignment of two snapshots into an alternating sequence of
// match and mismatch chunks. Small inputs get an exact minimal edit script
// (LCS); large inputs are split recursively on unique common tokens first,
// which keeps consecutive-revision alignment fast even on very large pages.
//
// After alignment, equal runs shorter than min_anchor_tokens are folded
// into the surrounding mismatches, so every match chunk is a usable anchor.
// Chunks tile both token sequences exactly, in order, with no overlap.

#ifndef REVFORGE_ALIGN_HPP
#define REVFORGE_ALIGN_HPP

#include <cstddef>
#include <vector>

#include "revforge/tokenize.hpp"

namespace revforge {

enum class ChunkKind { kMatch, kMismatch };

struct AlignmentChunk {
  ChunkKind kind;
  size_t src_begin = 0, src_end = 0;
  size_t tgt_begin = 0, tgt_end = 0;

  size_t src_len() const { return src_end - src_begin; }
  size_t tgt_len() const { return tgt_end - tgt_begin; }
};

std::vector<AlignmentChunk> align_texts(const Tokens& src, const Tokens& tgt,
                                        size_t min_anchor_tokens = 2);

}  // namespace revforge

#endif  // REVFORGE_ALIGN_HPP
