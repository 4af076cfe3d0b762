// io.hpp
//
// JSON-lines record formats shared by the CLI stages: snapshot pairs from
// ingest, example pairs from the forge, decode traces and score reports.

#ifndef REVFORGE_IO_HPP
#define REVFORGE_IO_HPP

#include <string>

#include <json.hpp>

#include "revforge/decode.hpp"
#include "revforge/dump_ingest.hpp"
#include "revforge/forge.hpp"
#include "revforge/metrics.hpp"

namespace revforge {

nlohmann::json to_json(const SnapshotPair& p);
SnapshotPair snapshot_pair_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExamplePair& e);
ExamplePair example_pair_from_json(const nlohmann::json& j);
// Two-column TSV (source TAB target), with \t, \n, \r and backslash escaped.
std::string example_pair_tsv(const ExamplePair& e);

nlohmann::json to_json(const ScoreReport& r);
nlohmann::json to_json(const DecodeTrace& t);
nlohmann::json to_json(const IngestStats& s);
nlohmann::json to_json(const ForgeStats& s);

// Parses one JSON-lines record, with the 1-based line number in errors.
nlohmann::json parse_jsonl_line(const std::string& line, size_t line_no);

}  // namespace revforge

#endif  // REVFORGE_IO_HPP
