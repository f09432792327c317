#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "atlas/graph.hpp"

namespace atlas {

// Atlas TSV: event<TAB>dimension<TAB>target<TAB>split<TAB>worker_id per line,
// '#' comment lines and blank lines skipped. Throws ParseError with the line.
std::vector<Triple> parse_atlas_tsv(std::istream& in);
void write_atlas_tsv(const std::vector<Triple>& triples, std::ostream& out);

// JSON lines with keys event, dimension, target, split, worker_id.
std::vector<Triple> parse_atlas_jsonl(std::istream& in);
void write_atlas_jsonl(const std::vector<Triple>& triples, std::ostream& out);

// Sort by (event, dimension name, target, split, worker) for byte-stable output.
void canonical_order(std::vector<Triple>& triples);

// Picks the format from the extension (.jsonl / .json -> JSON lines, else TSV).
std::vector<Triple> load_atlas(const std::filesystem::path& path);
void save_atlas(const std::vector<Triple>& triples, const std::filesystem::path& path);

}  // namespace atlas
