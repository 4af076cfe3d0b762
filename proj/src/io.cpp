#include "revforge/io.hpp"

#include <cmath>

#include "revforge/errors.hpp"

namespace revforge {

using nlohmann::json;

json to_json(const SnapshotPair& p) {
  return json{{"page_id", p.page_id},
              {"pair_index", p.pair_index},
              {"source_raw", p.source_raw},
              {"target_raw", p.target_raw}};
}

SnapshotPair snapshot_pair_from_json(const json& j) {
  SnapshotPair p;
  p.page_id = j.at("page_id").get<int64_t>();
  p.pair_index = j.at("pair_index").get<int64_t>();
  p.source_raw = j.at("source_raw").get<std::string>();
  p.target_raw = j.at("target_raw").get<std::string>();
  return p;
}

json to_json(const ExamplePair& e) {
  return json{{"src", join_tokens(e.source_tokens)},
              {"tgt", join_tokens(e.target_tokens)},
              {"identity", e.is_identity},
              {"origin",
               {{"page_id", e.page_id},
                {"pair_index", e.pair_index},
                {"segment_index", e.segment_index}}}};
}

ExamplePair example_pair_from_json(const json& j) {
  ExamplePair e;
  e.source_tokens = split_ws(j.at("src").get<std::string>());
  e.target_tokens = split_ws(j.at("tgt").get<std::string>());
  e.is_identity = j.at("identity").get<bool>();
  if (j.contains("origin")) {
    const auto& o = j.at("origin");
    e.page_id = o.value("page_id", int64_t{0});
    e.pair_index = o.value("pair_index", int64_t{0});
    e.segment_index = o.value("segment_index", int64_t{0});
  }
  return e;
}

namespace {

std::string tsv_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // +inf in traces (identity absent) serializes as null
}

}  // namespace

std::string example_pair_tsv(const ExamplePair& e) {
  return tsv_escape(join_tokens(e.source_tokens)) + "\t" +
         tsv_escape(join_tokens(e.target_tokens));
}

json to_json(const ScoreReport& r) {
  json j{{"precision", r.precision}, {"recall", r.recall},
         {"f_half", r.f_half},       {"tp", r.tp},
         {"fp", r.fp},               {"fn", r.fn}};
  if (r.gleu) j["gleu"] = *r.gleu;
  return j;
}

json to_json(const DecodeTrace& t) {
  json iters = json::array();
  for (const IterationRecord& it : t.iterations) {
    json nbest = json::array();
    for (const Hypothesis& h : it.nbest)
      nbest.push_back({{"tokens", h.tokens}, {"cost", h.cost}});
    iters.push_back({{"input", it.input},
                     {"nbest", std::move(nbest)},
                     {"identity_cost", finite_or_null(it.identity_cost)},
                     {"best_nonidentity_cost",
                      finite_or_null(it.best_nonidentity_cost)},
                     {"accepted", it.accepted},
                     {"output", it.output}});
  }
  return json{{"iterations", std::move(iters)},
              {"final", t.final_tokens},
              {"cycled", t.cycled}};
}

json to_json(const IngestStats& s) {
  return json{{"pages_read", s.pages_read},
              {"pages_kept", s.pages_kept},
              {"pages_skipped", s.pages_skipped},
              {"pairs_emitted", s.pairs_emitted},
              {"truncated", s.truncated}};
}

json to_json(const ForgeStats& s) {
  return json{{"pairs_read", s.pairs_read},
              {"examples_emitted", s.examples_emitted},
              {"identity_emitted", s.identity_emitted},
              {"identity_dropped", s.identity_dropped},
              {"overlength_dropped", s.overlength_dropped},
              {"noise",
               {{"chars", s.noise.chars},
                {"triggered", s.noise.triggered},
                {"deletes", s.noise.deletes},
                {"inserts", s.noise.inserts},
                {"replaces", s.noise.replaces},
                {"transposes", s.noise.transposes}}}};
}

json parse_jsonl_line(const std::string& line, size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace revforge
