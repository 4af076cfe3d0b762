// revforge: forge weakly-supervised correction bitext out of revision
// dumps, decode with confidence-thresholded iterative beam search, and
// score with M2-style F0.5 / GLEU.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "revforge/decode.hpp"
#include "revforge/dump_ingest.hpp"
#include "revforge/errors.hpp"
#include "revforge/forge.hpp"
#include "revforge/gleu.hpp"
#include "revforge/io.hpp"
#include "revforge/metrics.hpp"
#include "revforge/parallel.hpp"
#include "revforge/rule_model.hpp"
#include "revforge/tune.hpp"

using namespace revforge;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct IoStreams {
  std::istream* in = nullptr;
  std::ostream* out = nullptr;
  std::ifstream fin;
  std::ofstream fout;

  void open_input(const std::string& path) {
    if (path == "-") {
      in = &std::cin;
      return;
    }
    fin.open(path);
    if (!fin) throw ConfigError("cannot open input " + path);
    in = &fin;
  }
  void open_output(const std::string& path) {
    if (path == "-") {
      out = &std::cout;
      return;
    }
    fout.open(path);
    if (!fout) throw ConfigError("cannot open output " + path);
    out = &fout;
  }
};

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Flat JSON config mirroring the command-line flags; flags override file
// values. Collects every violation before failing.
struct RunConfig {
  json file = json::object();
  std::vector<std::string> errors;

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      errors.push_back("cannot open config file " + path);
      return;
    }
    try {
      in >> file;
    } catch (const json::parse_error& e) {
      errors.push_back(std::string("config parse: ") + e.what());
      return;
    }
    if (!file.is_object()) errors.push_back("config must be a JSON object");
  }

  template <typename T>
  void fill(const CLI::Option* opt, const std::string& key, T* value) {
    if (opt != nullptr && opt->count() > 0) return;  // flag wins
    if (!file.contains(key)) return;
    try {
      *value = file.at(key).get<T>();
    } catch (const json::exception& e) {
      errors.push_back("config key '" + key + "': " + e.what());
    }
  }
};

uint64_t env_seed_default() {
  if (const char* env = std::getenv("REVFORGE_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw ConfigError("REVFORGE_SEED is not an integer: " +
                        std::string(env));
    }
  }
  return 0;
}

void print_header(const std::string& command, uint64_t seed, int workers,
                  const json& effective, bool quiet) {
  if (quiet) return;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(effective.dump())));
  json header{{"tool", "revforge"},   {"version", kVersion},
              {"command", command},   {"seed", seed},
              {"workers", workers},   {"config_hash", hash}};
  std::cerr << header.dump() << "\n";
}

std::shared_ptr<const StepScorer> load_model(const std::string& spec) {
  size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("--model expects toy:<rules> or ensemble:<manifest>, got " +
                      spec);
  std::string kind = spec.substr(0, colon);
  std::string path = spec.substr(colon + 1);
  if (kind == "toy")
    return std::make_shared<RuleScorer>(RuleTable::load(path));
  if (kind == "ensemble") {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ensemble manifest " + path);
    json manifest;
    try {
      in >> manifest;
    } catch (const json::parse_error& e) {
      throw ConfigError("ensemble manifest " + path + ": " + e.what());
    }
    std::string dir;
    size_t slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);
    std::vector<std::shared_ptr<const StepScorer>> members;
    for (const auto& entry : manifest.at("scorers")) {
      std::string mkind = entry.at("kind").get<std::string>();
      if (mkind != "toy")
        throw ConfigError("ensemble manifest: unknown scorer kind " + mkind);
      std::string rules = entry.at("rules").get<std::string>();
      if (!rules.empty() && rules[0] != '/') rules = dir + rules;
      members.push_back(std::make_shared<RuleScorer>(RuleTable::load(rules)));
    }
    double margin = manifest.value("floor_margin", 5.0);
    return make_ensemble(std::move(members), margin);
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_csv_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

// ---------------------------------------------------------------------------
// ingest

int cmd_ingest(const std::string& input, const std::string& output,
               const IngestConfig& cfg, bool quiet) {
  cfg.validate();
  IoStreams io;
  io.open_input(input);
  io.open_output(output);

  DumpReader reader(*io.in);
  IngestStats stats;
  while (auto page = reader.next()) {
    stats.pages_read = reader.pages_read();
    auto kept = filter_page(std::move(*page), cfg);
    if (!kept) continue;
    ++stats.pages_kept;
    for (const SnapshotPair& pair : downsample_snapshots(*kept, cfg)) {
      *io.out << to_json(pair).dump() << "\n";
      ++stats.pairs_emitted;
    }
  }
  stats.pages_read = reader.pages_read();
  stats.pages_skipped = reader.pages_skipped();
  stats.truncated = reader.truncated();
  if (!quiet) std::cerr << to_json(stats).dump() << "\n";
  io.out->flush();
  if (stats.truncated) {
    std::cerr << "error: dump stream truncated inside a page region\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// forge

int cmd_forge(const std::string& input, const std::string& output,
              const std::string& format, const ForgeConfig& cfg,
              const SubwordVocab* vocab, const MarkupRules* markup,
              int workers, bool quiet) {
  cfg.extract.validate();
  cfg.noise.validate();
  if (format != "jsonl" && format != "tsv")
    throw ConfigError("--format must be jsonl or tsv");

  IoStreams io;
  io.open_input(input);
  io.open_output(output);

  ForgeConfig effective = cfg;
  effective.vocab = vocab;
  effective.markup = markup;

  ForgeStats stats;
  size_t line_no = 0;
  const size_t batch_size = 256;
  std::vector<SnapshotPair> batch;
  std::string line;
  bool more = true;
  while (more) {
    batch.clear();
    while (batch.size() < batch_size && std::getline(*io.in, line)) {
      ++line_no;
      if (line.empty()) continue;
      batch.push_back(snapshot_pair_from_json(parse_jsonl_line(line, line_no)));
    }
    more = !batch.empty();
    if (!more) break;

    struct PairResult {
      std::vector<ExamplePair> examples;
      ForgeStats stats;
    };
    auto results = parallel_map<PairResult>(
        batch, workers, [&](const SnapshotPair& pair, size_t) {
          PairResult r;
          r.examples = forge_pair(pair, effective, &r.stats);
          return r;
        });
    for (const auto& r : results) {
      stats += r.stats;
      for (const auto& e : r.examples) {
        if (format == "tsv")
          *io.out << example_pair_tsv(e) << "\n";
        else
          *io.out << to_json(e).dump() << "\n";
      }
    }
  }
  if (!quiet) std::cerr << to_json(stats).dump() << "\n";
  io.out->flush();
  return 0;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeCli {
  std::string input = "-";
  std::string output = "-";
  std::string model;
  std::string from_jsonl;   // read this field from JSONL records
  std::string emit_trace;   // trace JSONL path
  std::string per_iter_gold;
  std::string per_iter_out = "-";  // "-" = stderr for the report
  std::string fixups;
  DecodeParams params;
  bool single_shot = false;
  bool no_early_stop = false;
  bool no_detok = false;
};

int cmd_decode(const DecodeCli& cli, int workers, bool quiet) {
  DecodeParams params = cli.params;
  if (cli.single_shot) params.max_iter = 1;
  if (cli.no_early_stop) params.early_stop_on_fixed_point = false;
  params.validate();

  auto scorer = load_model(cli.model);
  FixupRules fixups;
  if (!cli.fixups.empty()) fixups = FixupRules::load(cli.fixups);

  IoStreams io;
  io.open_input(cli.input);
  io.open_output(cli.output);

  std::vector<std::string> lines = read_lines(*io.in);
  std::vector<Tokens> sources;
  sources.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (cli.from_jsonl.empty()) {
      sources.push_back(tokenize(lines[i]));
    } else {
      json j = parse_jsonl_line(lines[i], i + 1);
      sources.push_back(tokenize(j.at(cli.from_jsonl).get<std::string>()));
    }
  }

  auto traces = parallel_map<DecodeTrace>(
      sources, workers, [&](const Tokens& src, size_t) {
        return iterative_decode(src, *scorer, params);
      });

  std::ofstream trace_out;
  if (!cli.emit_trace.empty()) {
    trace_out.open(cli.emit_trace);
    if (!trace_out) throw ConfigError("cannot open " + cli.emit_trace);
  }
  for (const DecodeTrace& t : traces) {
    std::string text =
        cli.no_detok ? join_tokens(t.final_tokens) : detokenize(t.final_tokens);
    if (!cli.fixups.empty()) text = fixups.apply(text);
    *io.out << text << "\n";
    if (trace_out.is_open()) trace_out << to_json(t).dump() << "\n";
  }
  io.out->flush();

  if (!cli.per_iter_gold.empty()) {
    auto gold = read_m2_file(cli.per_iter_gold);
    if (gold.size() != sources.size())
      throw DataError("per-iteration gold has " + std::to_string(gold.size()) +
                      " entries but input has " +
                      std::to_string(sources.size()));
    auto reports = per_iteration_report(gold, *scorer, params, workers);
    std::ofstream report_file;
    std::ostream* rep = &std::cerr;
    if (cli.per_iter_out != "-") {
      report_file.open(cli.per_iter_out);
      if (!report_file) throw ConfigError("cannot open " + cli.per_iter_out);
      rep = &report_file;
    }
    for (size_t k = 0; k < reports.size(); ++k) {
      json j = to_json(reports[k]);
      j["iteration"] = k + 1;
      *rep << j.dump() << "\n";
    }
  }
  (void)quiet;
  return 0;
}

// ---------------------------------------------------------------------------
// tune

int cmd_tune(const std::string& gold_path, const std::string& model,
             const std::string& thresholds_csv, const std::string& iters_csv,
             const DecodeParams& base, int workers) {
  auto dev = read_m2_file(gold_path);
  auto scorer = load_model(model);
  TuneGrid grid;
  grid.thresholds = parse_csv_doubles(thresholds_csv);
  grid.max_iters = parse_csv_ints(iters_csv);
  TuneResult result = tune_params(dev, *scorer, grid, base, workers);

  json table = json::array();
  for (const TunePoint& pt : result.table) {
    json row = to_json(pt.score);
    row["threshold"] = pt.threshold;
    row["max_iter"] = pt.max_iter;
    table.push_back(row);
  }
  json out{{"best",
            {{"threshold", result.best.threshold},
             {"max_iter", result.best.max_iter},
             {"beam", result.best.beam}}},
           {"table", table}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// score-m2 / score-gleu / fixup

int cmd_score_m2(const std::string& gold_path, const std::string& hyp_path) {
  auto entries = read_m2_file(gold_path);
  IoStreams io;
  io.open_input(hyp_path);
  auto lines = read_lines(*io.in);
  if (lines.size() != entries.size())
    throw DataError("hypothesis has " + std::to_string(lines.size()) +
                    " lines but gold has " + std::to_string(entries.size()));
  std::vector<M2Case> cases(entries.size());
  for (size_t i = 0; i < entries.size(); ++i)
    cases[i] = {entries[i].source, tokenize(lines[i]),
                entries[i].gold_by_annotator};
  ScoreReport r = m2_score(cases);
  char buf[96];
  std::snprintf(buf, sizeof buf, "P=%.4f R=%.4f F0.5=%.4f", r.precision,
                r.recall, r.f_half);
  std::cout << buf << "\n" << to_json(r).dump() << "\n";
  return 0;
}

int cmd_score_gleu(const std::string& src_path, const std::string& refs_csv,
                   const std::string& hyp_path, int n_max, int iterations,
                   uint64_t seed) {
  IoStreams src_io;
  src_io.open_input(src_path);
  auto src_lines = read_lines(*src_io.in);

  std::vector<std::vector<std::string>> ref_lines;
  {
    std::stringstream ss(refs_csv);
    std::string path;
    while (std::getline(ss, path, ',')) {
      if (path.empty()) continue;
      IoStreams rio;
      rio.open_input(path);
      ref_lines.push_back(read_lines(*rio.in));
      if (ref_lines.back().size() != src_lines.size())
        throw DataError("reference " + path + " is not line-aligned with " +
                        src_path);
    }
  }
  if (ref_lines.empty()) throw ConfigError("score-gleu needs --refs");

  IoStreams hyp_io;
  hyp_io.open_input(hyp_path);
  auto hyp_lines = read_lines(*hyp_io.in);
  if (hyp_lines.size() != src_lines.size())
    throw DataError("hypothesis line count does not match sources");

  std::vector<GleuCase> cases(src_lines.size());
  for (size_t i = 0; i < src_lines.size(); ++i) {
    cases[i].source = tokenize(src_lines[i]);
    cases[i].hyp = tokenize(hyp_lines[i]);
    for (const auto& ref : ref_lines) cases[i].references.push_back(tokenize(ref[i]));
  }
  double score = gleu(cases, n_max, iterations, seed);
  char buf[48];
  std::snprintf(buf, sizeof buf, "GLEU=%.4f", score);
  json j{{"gleu", score}, {"cases", cases.size()}, {"iterations", iterations}};
  std::cout << buf << "\n" << j.dump() << "\n";
  return 0;
}

int cmd_fixup(const std::string& rules_path, const std::string& input,
              const std::string& output) {
  FixupRules rules = FixupRules::load(rules_path);
  IoStreams io;
  io.open_input(input);
  io.open_output(output);
  std::string line;
  while (std::getline(*io.in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    *io.out << rules.apply(line) << "\n";
  }
  io.out->flush();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revforge: revision-history correction bitext, iterative "
               "decoding and scoring",
               "revforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  std::string config_path;
  uint64_t seed = 0;
  bool seed_given_default = false;
  int workers = max_workers();
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "global RNG seed (env REVFORGE_SEED)");
  auto* workers_opt =
      app.add_option("--workers", workers, "worker threads for parallel stages");
  app.add_option("--config", config_path,
                 "flat JSON config; flags override file values");
  app.add_flag("--quiet", quiet, "suppress the reproducibility header");

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "revision dump XML -> snapshot-pair JSONL");
  std::string in_input = "-", in_output = "-";
  IngestConfig in_cfg;
  ingest->add_option("--input,-i", in_input, "dump path or - for stdin");
  ingest->add_option("--output,-o", in_output, "output path or -");
  auto* mpb_opt = ingest->add_option("--max-page-bytes", in_cfg.max_page_bytes,
                                     "drop pages larger than this (inclusive)");
  auto* base_opt = ingest->add_option("--downsample-base", in_cfg.downsample_base,
                                      "log base for snapshot-pair downsampling");

  // forge
  auto* forge = app.add_subcommand(
      "forge", "snapshot pairs -> example pairs (align, extract, noise)");
  std::string fg_input = "-", fg_output = "-", fg_format = "jsonl";
  std::string fg_vocab, fg_markup, fg_noise_order = "pre-align";
  ForgeConfig fg_cfg;
  forge->add_option("--input,-i", fg_input, "pairs JSONL path or -");
  forge->add_option("--output,-o", fg_output, "output path or -");
  forge->add_option("--format", fg_format, "jsonl or tsv");
  auto* rate_opt = forge->add_option("--noise-rate", fg_cfg.noise.rate,
                                     "per-character noise probability");
  auto* keep_opt = forge->add_option("--identity-keep-prob",
                                     fg_cfg.extract.identity_keep_prob,
                                     "keep probability for identity examples");
  auto* maxlen_opt = forge->add_option("--max-len", fg_cfg.extract.max_len,
                                       "token cap per example side");
  auto* anchor_opt = forge->add_option("--min-anchor-tokens",
                                       fg_cfg.extract.min_anchor_tokens,
                                       "minimum match-run length kept as anchor");
  forge->add_option("--noise-order", fg_noise_order,
                    "pre-align (noise the snapshot) or post-extract");
  forge->add_option("--alphabet", fg_cfg.noise.alphabet,
                    "insert/replace character pool");
  forge->add_option("--vocab", fg_vocab, "subword vocab file (default whitespace)");
  forge->add_option("--markup-rules", fg_markup, "markup rule file override");

  // decode
  auto* decode = app.add_subcommand(
      "decode", "iterative beam-search rewriting of input sentences");
  DecodeCli dc;
  decode->add_option("--input,-i", dc.input, "sentences path or -");
  decode->add_option("--output,-o", dc.output, "output path or -");
  auto* model_opt = decode->add_option(
      "--model,-m", dc.model, "toy:<rules.tsv> or ensemble:<manifest.json>");
  auto* beam_opt = decode->add_option("--beam", dc.params.beam, "beam width");
  auto* thr_opt =
      decode->add_option("--threshold", dc.params.threshold,
                         "cost-ratio acceptance threshold (> 0)");
  auto* iter_opt =
      decode->add_option("--max-iter", dc.params.max_iter, "iteration cap");
  decode->add_flag("--single-shot", dc.single_shot,
                   "one pass only (same as --max-iter 1)");
  decode->add_flag("--no-early-stop", dc.no_early_stop,
                   "always run max-iter iterations");
  decode->add_flag("--no-detok", dc.no_detok, "emit space-joined tokens");
  decode->add_option("--from-jsonl", dc.from_jsonl,
                     "treat input as JSONL and decode this field");
  decode->add_option("--emit-trace", dc.emit_trace,
                     "write per-sentence decode traces (JSONL) here");
  decode->add_option("--per-iter-gold", dc.per_iter_gold,
                     "M2 gold for a per-iteration corpus report");
  decode->add_option("--per-iter-out", dc.per_iter_out,
                     "where the per-iteration report goes (- = stderr)");
  decode->add_option("--fixups", dc.fixups, "regex fixup rules for outputs");

  // tune
  auto* tune = app.add_subcommand(
      "tune", "grid-search threshold and iterations on an M2 dev set");
  std::string tn_gold, tn_model, tn_thresholds, tn_iters;
  DecodeParams tn_base;
  tune->add_option("--gold", tn_gold, "M2 dev file")->required();
  tune->add_option("--model,-m", tn_model, "model spec")->required();
  tune->add_option("--thresholds", tn_thresholds, "comma-separated list")
      ->required();
  tune->add_option("--max-iters", tn_iters, "comma-separated list")->required();
  tune->add_option("--beam", tn_base.beam, "beam width");

  // score-m2
  auto* score_m2 = app.add_subcommand("score-m2",
                                      "edit-level P/R/F0.5 against M2 gold");
  std::string sm_gold, sm_hyp = "-";
  score_m2->add_option("--gold", sm_gold, "M2 gold file")->required();
  score_m2->add_option("--hyp", sm_hyp, "hypothesis lines or -");

  // score-gleu
  auto* score_gleu = app.add_subcommand("score-gleu",
                                        "corpus GLEU against references");
  std::string sg_src, sg_refs, sg_hyp = "-";
  int sg_n = 4, sg_iters = 500;
  score_gleu->add_option("--src", sg_src, "source sentences")->required();
  score_gleu->add_option("--refs", sg_refs,
                         "comma-separated reference files, line-aligned")
      ->required();
  score_gleu->add_option("--hyp", sg_hyp, "hypothesis lines or -");
  score_gleu->add_option("--n", sg_n, "max n-gram order");
  score_gleu->add_option("--iterations", sg_iters, "sampling iterations");

  // fixup
  auto* fixup = app.add_subcommand("fixup", "apply regex fixup rules to lines");
  std::string fx_rules, fx_input = "-", fx_output = "-";
  fixup->add_option("--rules", fx_rules, "fixup rule file")->required();
  fixup->add_option("--input,-i", fx_input, "input path or -");
  fixup->add_option("--output,-o", fx_output, "output path or -");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);  // --help exits 0, usage errors exit nonzero
    }

    RunConfig rc;
    if (!config_path.empty()) rc.load(config_path);
    rc.fill(seed_opt, "seed", &seed);
    rc.fill(workers_opt, "workers", &workers);
    if (seed_opt->count() == 0 && !rc.file.contains("seed")) {
      seed = env_seed_default();
      seed_given_default = true;
    }
    (void)seed_given_default;
    if (workers < 1) rc.errors.push_back("workers must be >= 1");

    json effective{{"seed", seed}, {"workers", workers}};

    int code = 0;
    if (app.got_subcommand(ingest)) {
      rc.fill(mpb_opt, "max_page_bytes", &in_cfg.max_page_bytes);
      rc.fill(base_opt, "downsample_base", &in_cfg.downsample_base);
      in_cfg.seed = seed;
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      effective["max_page_bytes"] = in_cfg.max_page_bytes;
      effective["downsample_base"] = in_cfg.downsample_base;
      print_header("ingest", seed, workers, effective, quiet);
      code = cmd_ingest(in_input, in_output, in_cfg, quiet);
    } else if (app.got_subcommand(forge)) {
      rc.fill(rate_opt, "noise_rate", &fg_cfg.noise.rate);
      rc.fill(keep_opt, "identity_keep_prob", &fg_cfg.extract.identity_keep_prob);
      rc.fill(maxlen_opt, "max_len", &fg_cfg.extract.max_len);
      rc.fill(anchor_opt, "min_anchor_tokens", &fg_cfg.extract.min_anchor_tokens);
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      fg_cfg.extract.seed = seed;
      fg_cfg.noise.seed = seed;
      if (fg_noise_order == "pre-align")
        fg_cfg.noise_order = NoiseOrder::kPreAlign;
      else if (fg_noise_order == "post-extract")
        fg_cfg.noise_order = NoiseOrder::kPostExtract;
      else
        throw ConfigError("--noise-order must be pre-align or post-extract");
      std::optional<SubwordVocab> vocab;
      if (!fg_vocab.empty()) vocab = SubwordVocab::load(fg_vocab);
      std::optional<MarkupRules> markup;
      if (!fg_markup.empty()) markup = MarkupRules::load(fg_markup);
      effective["noise_rate"] = fg_cfg.noise.rate;
      effective["identity_keep_prob"] = fg_cfg.extract.identity_keep_prob;
      effective["max_len"] = fg_cfg.extract.max_len;
      effective["noise_order"] = fg_noise_order;
      print_header("forge", seed, workers, effective, quiet);
      code = cmd_forge(fg_input, fg_output, fg_format, fg_cfg,
                       vocab ? &*vocab : nullptr, markup ? &*markup : nullptr,
                       workers, quiet);
    } else if (app.got_subcommand(decode)) {
      rc.fill(beam_opt, "beam", &dc.params.beam);
      rc.fill(thr_opt, "threshold", &dc.params.threshold);
      rc.fill(iter_opt, "max_iter", &dc.params.max_iter);
      rc.fill(model_opt, "model", &dc.model);
      if (dc.model.empty())
        rc.errors.push_back("decode needs --model (or config key 'model')");
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      effective["beam"] = dc.params.beam;
      effective["threshold"] = dc.params.threshold;
      effective["max_iter"] = dc.single_shot ? 1 : dc.params.max_iter;
      effective["model"] = dc.model;
      print_header("decode", seed, workers, effective, quiet);
      code = cmd_decode(dc, workers, quiet);
    } else if (app.got_subcommand(tune)) {
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      effective["thresholds"] = tn_thresholds;
      effective["max_iters"] = tn_iters;
      print_header("tune", seed, workers, effective, quiet);
      code = cmd_tune(tn_gold, tn_model, tn_thresholds, tn_iters, tn_base,
                      workers);
    } else if (app.got_subcommand(score_m2)) {
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      print_header("score-m2", seed, workers, effective, quiet);
      code = cmd_score_m2(sm_gold, sm_hyp);
    } else if (app.got_subcommand(score_gleu)) {
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      effective["iterations"] = sg_iters;
      print_header("score-gleu", seed, workers, effective, quiet);
      code = cmd_score_gleu(sg_src, sg_refs, sg_hyp, sg_n, sg_iters, seed);
    } else if (app.got_subcommand(fixup)) {
      if (!rc.errors.empty()) throw ConfigError(join_tokens(rc.errors));
      print_header("fixup", seed, workers, effective, quiet);
      code = cmd_fixup(fx_rules, fx_input, fx_output);
    }
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
