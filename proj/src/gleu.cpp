#include "revforge/gleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "revforge/errors.hpp"
#include "revforge/rng.hpp"

namespace revforge {

namespace {

using Counter = std::unordered_map<std::string, long>;

Counter ngram_counts(const Tokens& toks, int n) {
  Counter c;
  if (static_cast<int>(toks.size()) < n) return c;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += toks[i + k];
    }
    ++c[key];
  }
  return c;
}

long count_in(const Counter& c, const std::string& g) {
  auto it = c.find(g);
  return it == c.end() ? 0L : it->second;
}

}  // namespace

double gleu(const std::vector<GleuCase>& cases, int n_max, int iterations,
            uint64_t seed) {
  if (cases.empty()) throw DataError("gleu: no cases");
  if (n_max < 1) throw ConfigError("gleu: n_max must be >= 1");
  if (iterations < 1) throw ConfigError("gleu: iterations must be >= 1");

  size_t max_refs = 0;
  for (size_t c = 0; c < cases.size(); ++c) {
    if (cases[c].references.empty())
      throw DataError("gleu: case " + std::to_string(c + 1) +
                      " has no references");
    max_refs = std::max(max_refs, cases[c].references.size());
  }
  // Single-reference corpora need no sampling at all.
  int iters = max_refs == 1 ? 1 : iterations;

  // Per (case, reference): numerator/denominator per order plus lengths,
  // precomputed once; iterations then just sum them.
  struct RefStats {
    std::vector<long> num, den;
    size_t ref_len = 0;
  };
  std::vector<std::vector<RefStats>> stats(cases.size());
  std::vector<size_t> hyp_lens(cases.size());
  for (size_t c = 0; c < cases.size(); ++c) {
    const GleuCase& gc = cases[c];
    hyp_lens[c] = gc.hyp.size();
    stats[c].resize(gc.references.size());
    for (size_t r = 0; r < gc.references.size(); ++r) {
      RefStats rs;
      rs.ref_len = gc.references[r].size();
      rs.num.resize(n_max + 1, 0);
      rs.den.resize(n_max + 1, 0);
      for (int n = 1; n <= n_max; ++n) {
        Counter hyp_c = ngram_counts(gc.hyp, n);
        Counter ref_c = ngram_counts(gc.references[r], n);
        Counter src_c = ngram_counts(gc.source, n);
        long num = 0, den = 0;
        for (const auto& [g, hcount] : hyp_c) {
          den += hcount;
          long with_ref = std::min(hcount, count_in(ref_c, g));
          num += with_ref;
          // Penalize n-grams kept from the source that the reference
          // dropped.
          if (src_c.count(g) && !ref_c.count(g)) {
            long with_src = std::min(hcount, count_in(src_c, g));
            num -= std::max(0L, with_src - with_ref);
          }
        }
        rs.num[n] = num;
        rs.den[n] = den;
      }
      stats[c][r] = std::move(rs);
    }
  }

  // Seeded per-case shuffle, cycled across iterations.
  std::vector<std::vector<size_t>> perm(cases.size());
  for (size_t c = 0; c < cases.size(); ++c) {
    size_t nrefs = cases[c].references.size();
    perm[c].resize(nrefs);
    for (size_t r = 0; r < nrefs; ++r) perm[c][r] = r;
    SplitMix64 rng(derive_seed(seed, {static_cast<uint64_t>(c), 0x676c6575ull}));
    for (size_t r = nrefs; r > 1; --r)
      std::swap(perm[c][r - 1], perm[c][rng.below(r)]);
  }

  double total = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<long> num(n_max + 1, 0), den(n_max + 1, 0);
    long hyp_len = 0, ref_len = 0;
    for (size_t c = 0; c < cases.size(); ++c) {
      const RefStats& rs = stats[c][perm[c][it % perm[c].size()]];
      for (int n = 1; n <= n_max; ++n) {
        num[n] += rs.num[n];
        den[n] += rs.den[n];
      }
      hyp_len += static_cast<long>(hyp_lens[c]);
      ref_len += static_cast<long>(rs.ref_len);
    }
    double score;
    if (hyp_len == 0) {
      score = 0.0;
    } else {
      double log_sum = 0.0;
      int orders = 0;
      bool zero = false;
      for (int n = 1; n <= n_max; ++n) {
        if (den[n] == 0) continue;  // hypothesis shorter than n everywhere
        ++orders;
        double p = static_cast<double>(std::max(0L, num[n])) /
                   static_cast<double>(den[n]);
        if (p <= 0.0) {
          zero = true;
          break;
        }
        log_sum += std::log(p);
      }
      if (zero || orders == 0) {
        score = 0.0;
      } else {
        double bp = hyp_len >= ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) /
                                             static_cast<double>(hyp_len));
        score = bp * std::exp(log_sum / orders);
      }
    }
    total += score;
  }
  return total / iters;
}

}  // namespace revforge
