#include "revforge/align.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace revforge {

namespace {

// Inputs whose combined middle length is at most this get the exact LCS
// diff; larger ones are split on unique common tokens first.
constexpr size_t kLcsLimit = 1024;

struct Builder {
  std::vector<AlignmentChunk> chunks;

  void match(size_t s0, size_t s1, size_t t0) {
    if (s0 == s1) return;
    chunks.push_back({ChunkKind::kMatch, s0, s1, t0, t0 + (s1 - s0)});
  }
  void mismatch(size_t s0, size_t s1, size_t t0, size_t t1) {
    if (s0 == s1 && t0 == t1) return;
    chunks.push_back({ChunkKind::kMismatch, s0, s1, t0, t1});
  }
};

// Exact minimal edit script via LCS backtracking; deterministic tie-break
// prefers match, then deletion, then insertion.
void lcs_diff(const Tokens& src, size_t s0, size_t s1, const Tokens& tgt,
              size_t t0, size_t t1, Builder& out) {
  const size_t n = s1 - s0, m = t1 - t0;
  std::vector<int> dp((n + 1) * (m + 1), 0);
  auto at = [&](size_t i, size_t j) -> int& { return dp[i * (m + 1) + j]; };
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      if (src[s0 + i] == tgt[t0 + j])
        at(i, j) = at(i + 1, j + 1) + 1;
      else
        at(i, j) = std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  size_t i = 0, j = 0;
  size_t ms = 0, mt = 0;  // pending mismatch begin
  bool in_mismatch = false;
  auto open = [&]() {
    if (!in_mismatch) {
      ms = s0 + i;
      mt = t0 + j;
      in_mismatch = true;
    }
  };
  auto close = [&]() {
    if (in_mismatch) {
      out.mismatch(ms, s0 + i, mt, t0 + j);
      in_mismatch = false;
    }
  };
  while (i < n || j < m) {
    if (i < n && j < m && src[s0 + i] == tgt[t0 + j] &&
        at(i, j) == at(i + 1, j + 1) + 1) {
      close();
      size_t run_s = s0 + i, run_t = t0 + j;
      while (i < n && j < m && src[s0 + i] == tgt[t0 + j] &&
             at(i, j) == at(i + 1, j + 1) + 1) {
        ++i;
        ++j;
      }
      out.match(run_s, s0 + i, run_t);
    } else if (i < n && (j == m || at(i + 1, j) >= at(i, j + 1))) {
      open();
      ++i;
    } else {
      open();
      ++j;
    }
  }
  close();
}

struct Anchor {
  size_t src_pos, tgt_pos;
};

// Tokens occurring exactly once in both ranges, chained by longest
// increasing subsequence over target positions (patience alignment).
std::vector<Anchor> patience_anchors(const Tokens& src, size_t s0, size_t s1,
                                     const Tokens& tgt, size_t t0, size_t t1) {
  struct Occ {
    size_t src_count = 0, tgt_count = 0;
    size_t src_pos = 0, tgt_pos = 0;
  };
  std::unordered_map<std::string, Occ> occ;
  for (size_t i = s0; i < s1; ++i) {
    auto& o = occ[src[i]];
    ++o.src_count;
    o.src_pos = i;
  }
  for (size_t j = t0; j < t1; ++j) {
    auto it = occ.find(tgt[j]);
    if (it == occ.end()) continue;
    ++it->second.tgt_count;
    it->second.tgt_pos = j;
  }
  std::vector<Anchor> cand;
  for (auto& [tok, o] : occ)
    if (o.src_count == 1 && o.tgt_count == 1)
      cand.push_back({o.src_pos, o.tgt_pos});
  std::sort(cand.begin(), cand.end(),
            [](const Anchor& a, const Anchor& b) { return a.src_pos < b.src_pos; });

  // LIS on tgt_pos, patience-style.
  std::vector<size_t> tails;          // index into cand of smallest tail per length
  std::vector<int> prev(cand.size(), -1);
  for (size_t k = 0; k < cand.size(); ++k) {
    size_t lo = 0, hi = tails.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cand[tails[mid]].tgt_pos < cand[k].tgt_pos)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo > 0) prev[k] = static_cast<int>(tails[lo - 1]);
    if (lo == tails.size())
      tails.push_back(k);
    else
      tails[lo] = k;
  }
  std::vector<Anchor> chain;
  if (!tails.empty()) {
    for (int k = static_cast<int>(tails.back()); k >= 0; k = prev[k])
      chain.push_back(cand[k]);
    std::reverse(chain.begin(), chain.end());
  }
  return chain;
}

void diff_rec(const Tokens& src, size_t s0, size_t s1, const Tokens& tgt,
              size_t t0, size_t t1, Builder& out, int depth) {
  // Common prefix.
  size_t p0s = s0, p0t = t0;
  while (s0 < s1 && t0 < t1 && src[s0] == tgt[t0]) ++s0, ++t0;
  out.match(p0s, s0, p0t);
  // Common suffix (emitted after the middle).
  size_t suf = 0;
  while (s1 > s0 && t1 > t0 && src[s1 - 1] == tgt[t1 - 1]) --s1, --t1, ++suf;

  if (s0 == s1 || t0 == t1) {
    out.mismatch(s0, s1, t0, t1);
  } else if ((s1 - s0) + (t1 - t0) <= kLcsLimit) {
    lcs_diff(src, s0, s1, tgt, t0, t1, out);
  } else if (depth >= 32) {
    out.mismatch(s0, s1, t0, t1);
  } else {
    auto anchors = patience_anchors(src, s0, s1, tgt, t0, t1);
    if (anchors.empty()) {
      out.mismatch(s0, s1, t0, t1);
    } else {
      size_t cs = s0, ct = t0;
      for (const Anchor& a : anchors) {
        diff_rec(src, cs, a.src_pos, tgt, ct, a.tgt_pos, out, depth + 1);
        out.match(a.src_pos, a.src_pos + 1, a.tgt_pos);
        cs = a.src_pos + 1;
        ct = a.tgt_pos + 1;
      }
      diff_rec(src, cs, s1, tgt, ct, t1, out, depth + 1);
    }
  }
  out.match(s1, s1 + suf, t1);
}

}  // namespace

std::vector<AlignmentChunk> align_texts(const Tokens& src, const Tokens& tgt,
                                        size_t min_anchor_tokens) {
  Builder b;
  diff_rec(src, 0, src.size(), tgt, 0, tgt.size(), b, 0);

  // Fold short matches into mismatches, then merge adjacent chunks of the
  // same kind so the result alternates.
  std::vector<AlignmentChunk> out;
  for (AlignmentChunk c : b.chunks) {
    if (c.kind == ChunkKind::kMatch && c.src_len() < min_anchor_tokens)
      c.kind = ChunkKind::kMismatch;
    if (!out.empty() && out.back().kind == c.kind) {
      out.back().src_end = c.src_end;
      out.back().tgt_end = c.tgt_end;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace revforge
