#include "revforge/metrics.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "revforge/errors.hpp"

namespace revforge {

double f_beta(double p, double r, double beta) {
  if (p < 0.0 || p > 1.0 || r < 0.0 || r > 1.0)
    throw ConfigError("f_beta: precision and recall must be in [0, 1]");
  if (!(beta > 0.0)) throw ConfigError("f_beta: beta must be > 0");
  double b2 = beta * beta;
  double denom = b2 * p + r;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * p * r / denom;
}

namespace {

// Token edit costs. Substitution deliberately costs delete+insert so both
// script families tie and gold matching decides between them.
constexpr int kDel = 1, kIns = 1, kSub = 2;

struct Lattice {
  size_t n, m;
  std::vector<int> fwd, bwd;

  int& f(size_t i, size_t j) { return fwd[i * (m + 1) + j]; }
  int& b(size_t i, size_t j) { return bwd[i * (m + 1) + j]; }
  int f(size_t i, size_t j) const { return fwd[i * (m + 1) + j]; }
  int b(size_t i, size_t j) const { return bwd[i * (m + 1) + j]; }

  Lattice(const Tokens& src, const Tokens& hyp)
      : n(src.size()), m(hyp.size()),
        fwd((src.size() + 1) * (hyp.size() + 1), 0),
        bwd((src.size() + 1) * (hyp.size() + 1), 0) {
    for (size_t i = 0; i <= n; ++i)
      for (size_t j = 0; j <= m; ++j) {
        if (i == 0 && j == 0) continue;
        int best = std::numeric_limits<int>::max();
        if (i > 0 && j > 0 && src[i - 1] == hyp[j - 1])
          best = std::min(best, f(i - 1, j - 1));
        if (i > 0 && j > 0) best = std::min(best, f(i - 1, j - 1) + kSub);
        if (i > 0) best = std::min(best, f(i - 1, j) + kDel);
        if (j > 0) best = std::min(best, f(i, j - 1) + kIns);
        f(i, j) = best;
      }
    for (size_t i = n + 1; i-- > 0;)
      for (size_t j = m + 1; j-- > 0;) {
        if (i == n && j == m) continue;
        int best = std::numeric_limits<int>::max();
        if (i < n && j < m && src[i] == hyp[j]) best = std::min(best, b(i + 1, j + 1));
        if (i < n && j < m) best = std::min(best, b(i + 1, j + 1) + kSub);
        if (i < n) best = std::min(best, b(i + 1, j) + kDel);
        if (j < m) best = std::min(best, b(i, j + 1) + kIns);
        b(i, j) = best;
      }
  }

  int total() const { return f(n, m); }
  bool on_path(size_t i, size_t j) const { return f(i, j) + b(i, j) == total(); }
};

enum Move { kM = 0, kS = 1, kD = 2, kI = 3 };

struct Walker {
  const Tokens& src;
  const Tokens& hyp;
  const Lattice& lat;
  const EditSet* gold;  // may be null

  // Memoized best achievable gold-match count from a state. States carry
  // the open run's start when inside one.
  std::unordered_map<uint64_t, int> memo;

  uint64_t key(size_t i, size_t j, bool run, size_t si, size_t sj) const {
    uint64_t cell = static_cast<uint64_t>(i) * (lat.m + 1) + j;
    uint64_t a = run ? si + 1 : 0;
    uint64_t b = run ? sj + 1 : 0;
    return (cell * (lat.n + 2) + a) * (lat.m + 2) + b;
  }

  bool move_valid(size_t i, size_t j, Move mv, size_t* ni, size_t* nj) const {
    size_t n = lat.n, m = lat.m;
    switch (mv) {
      case kM:
        if (i >= n || j >= m || src[i] != hyp[j]) return false;
        if (lat.f(i, j) != lat.f(i + 1, j + 1)) return false;
        *ni = i + 1, *nj = j + 1;
        break;
      case kS:
        if (i >= n || j >= m) return false;
        if (lat.f(i, j) + kSub != lat.f(i + 1, j + 1)) return false;
        *ni = i + 1, *nj = j + 1;
        break;
      case kD:
        if (i >= n) return false;
        if (lat.f(i, j) + kDel != lat.f(i + 1, j)) return false;
        *ni = i + 1, *nj = j;
        break;
      case kI:
        if (j >= m) return false;
        if (lat.f(i, j) + kIns != lat.f(i, j + 1)) return false;
        *ni = i, *nj = j + 1;
        break;
    }
    return lat.on_path(*ni, *nj);
  }

  int gold_hit(size_t si, size_t i, size_t sj, size_t j) const {
    if (!gold) return 0;
    Edit e{si, i, Tokens(hyp.begin() + sj, hyp.begin() + j)};
    for (const Edit& g : *gold)
      if (g == e) return 1;
    return 0;
  }

  int best(size_t i, size_t j, bool run, size_t si, size_t sj) {
    if (i == lat.n && j == lat.m) return run ? gold_hit(si, i, sj, j) : 0;
    uint64_t k = key(i, j, run, run ? si : 0, run ? sj : 0);
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    int out = std::numeric_limits<int>::min();
    size_t ni = 0, nj = 0;
    for (Move mv : {kM, kS, kD, kI}) {
      if (!move_valid(i, j, mv, &ni, &nj)) continue;
      int v;
      if (mv == kM)
        v = (run ? gold_hit(si, i, sj, j) : 0) + best(ni, nj, false, 0, 0);
      else if (run)
        v = best(ni, nj, true, si, sj);
      else
        v = best(ni, nj, true, i, j);
      out = std::max(out, v);
    }
    memo[k] = out;
    return out;
  }

  // Greedy reconstruction: lexicographically first (M < S < D < I) among
  // the scripts achieving the best gold score.
  EditSet walk(bool use_gold_dp) {
    EditSet edits;
    size_t i = 0, j = 0, si = 0, sj = 0;
    bool run = false;
    int remaining = use_gold_dp ? best(0, 0, false, 0, 0) : 0;
    while (i != lat.n || j != lat.m) {
      size_t ni = 0, nj = 0;
      bool stepped = false;
      for (Move mv : {kM, kS, kD, kI}) {
        if (!move_valid(i, j, mv, &ni, &nj)) continue;
        int gain = (mv == kM && run) ? gold_hit(si, i, sj, j) : 0;
        if (use_gold_dp) {
          int future;
          if (mv == kM)
            future = best(ni, nj, false, 0, 0);
          else if (run)
            future = best(ni, nj, true, si, sj);
          else
            future = best(ni, nj, true, i, j);
          if (gain + future != remaining) continue;
          remaining = future;
        }
        if (mv == kM) {
          if (run) {
            edits.push_back({si, i, Tokens(hyp.begin() + sj, hyp.begin() + j)});
            run = false;
          }
        } else if (!run) {
          run = true;
          si = i;
          sj = j;
        }
        i = ni;
        j = nj;
        stepped = true;
        break;
      }
      if (!stepped)
        throw DataError("edit extraction: no valid move (internal)");
    }
    if (run)
      edits.push_back({si, i, Tokens(hyp.begin() + sj, hyp.begin() + j)});
    return edits;
  }
};

}  // namespace

EditSet extract_edits(const Tokens& source, const Tokens& hyp,
                      const EditSet* gold) {
  if (source.size() >= (1 << 16) || hyp.size() >= (1 << 16))
    throw DataError("edit extraction: sequence too long");
  Lattice lat(source, hyp);
  Walker w{source, hyp, lat, gold, {}};
  // The gold-aware DP is quadratic in sentence length times run lengths;
  // for pathologically large comparisons fall back to the plain
  // lexicographically-first minimal script.
  bool use_gold = gold != nullptr && !gold->empty() &&
                  source.size() * hyp.size() <= 250000;
  return w.walk(use_gold);
}

Tokens apply_edits(const Tokens& source, const EditSet& edits) {
  Tokens out;
  size_t pos = 0;
  for (const Edit& e : edits) {
    if (e.start < pos || e.end < e.start || e.end > source.size())
      throw DataError("apply_edits: edits not sorted/non-overlapping");
    out.insert(out.end(), source.begin() + pos, source.begin() + e.start);
    out.insert(out.end(), e.replacement.begin(), e.replacement.end());
    pos = e.end;
  }
  out.insert(out.end(), source.begin() + pos, source.end());
  return out;
}

ScoreReport m2_score(const std::vector<M2Case>& cases, double beta) {
  uint64_t tp = 0, fp = 0, fn = 0;
  auto prec = [](uint64_t t, uint64_t f) {
    return t + f == 0 ? 1.0 : static_cast<double>(t) / static_cast<double>(t + f);
  };
  size_t case_no = 0;
  for (const M2Case& c : cases) {
    ++case_no;
    if (c.gold_by_annotator.empty())
      throw DataError("m2_score: case " + std::to_string(case_no) +
                      " has no annotators");
    // Charge the annotator that maximizes the running corpus F score.
    double best_f = -1.0;
    uint64_t best_tp = 0, best_fp = 0, best_fn = 0;
    for (const auto& [annotator, gold] : c.gold_by_annotator) {
      (void)annotator;
      EditSet sys = extract_edits(c.source, c.hyp, &gold);
      uint64_t ctp = 0;
      for (const Edit& e : sys)
        if (std::find(gold.begin(), gold.end(), e) != gold.end()) ++ctp;
      uint64_t cfp = sys.size() - ctp;
      uint64_t cfn = gold.size() - ctp;
      double f = f_beta(prec(tp + ctp, fp + cfp), prec(tp + ctp, fn + cfn), beta);
      if (f > best_f) {
        best_f = f;
        best_tp = ctp;
        best_fp = cfp;
        best_fn = cfn;
      }
    }
    tp += best_tp;
    fp += best_fp;
    fn += best_fn;
  }
  ScoreReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = prec(tp, fp);
  r.recall = prec(tp, fn);
  r.f_half = f_beta(r.precision, r.recall, beta);
  return r;
}

namespace {

void finish_entry(std::vector<M2Entry>& out, M2Entry& cur, bool& open,
                  size_t line_no) {
  if (!open) return;
  if (cur.gold_by_annotator.empty())
    throw DataError("m2 line " + std::to_string(line_no) +
                    ": sentence without annotations");
  for (auto& [annotator, edits] : cur.gold_by_annotator) {
    (void)annotator;
    std::sort(edits.begin(), edits.end());
    for (size_t k = 1; k < edits.size(); ++k)
      if (edits[k].start < edits[k - 1].end)
        throw DataError("m2 line " + std::to_string(line_no) +
                        ": overlapping edits for one annotator");
  }
  out.push_back(std::move(cur));
  cur = M2Entry{};
  open = false;
}

}  // namespace

std::vector<M2Entry> read_m2(std::istream& in) {
  std::vector<M2Entry> out;
  M2Entry cur;
  bool open = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_entry(out, cur, open, line_no);
      continue;
    }
    if (line.compare(0, 2, "S ") == 0) {
      finish_entry(out, cur, open, line_no);
      cur.source = split_ws(line.substr(2));
      open = true;
      continue;
    }
    if (line.compare(0, 2, "A ") == 0) {
      if (!open)
        throw DataError("m2 line " + std::to_string(line_no) +
                        ": A line before any S line");
      std::vector<std::string> fields;
      size_t pos = 2;
      while (true) {
        size_t sep = line.find("|||", pos);
        if (sep == std::string::npos) {
          fields.push_back(line.substr(pos));
          break;
        }
        fields.push_back(line.substr(pos, sep - pos));
        pos = sep + 3;
      }
      if (fields.size() < 6)
        throw DataError("m2 line " + std::to_string(line_no) +
                        ": expected 6 |||-separated fields");
      std::istringstream range(fields[0]);
      long long start = 0, end = 0;
      if (!(range >> start >> end))
        throw DataError("m2 line " + std::to_string(line_no) + ": bad span");
      int annotator = std::atoi(fields[5].c_str());
      const std::string& type = fields[1];
      if (type == "noop" || start == -1) {
        cur.gold_by_annotator[annotator];  // registers with zero edits
        continue;
      }
      if (start < 0 || end < start ||
          static_cast<size_t>(end) > cur.source.size())
        throw DataError("m2 line " + std::to_string(line_no) +
                        ": span out of range");
      Edit e;
      e.start = static_cast<size_t>(start);
      e.end = static_cast<size_t>(end);
      if (fields[2] != "-NONE-") e.replacement = split_ws(fields[2]);
      cur.gold_by_annotator[annotator].push_back(std::move(e));
      continue;
    }
    throw DataError("m2 line " + std::to_string(line_no) +
                    ": expected S, A or blank line");
  }
  finish_entry(out, cur, open, line_no);
  return out;
}

std::vector<M2Entry> read_m2_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open m2 file " + path);
  return read_m2(in);
}

}  // namespace revforge
