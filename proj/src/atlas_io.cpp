#include "atlas/atlas_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>

#include <json.hpp>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

using Kind = ParseError::Kind;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

Triple make_triple(std::string_view event, std::string_view dim, std::string_view target,
                   std::string_view split, std::string_view worker, std::size_t line_no) {
  const auto d = parse_dimension(dim);
  if (!d) throw ParseError(Kind::UnknownDimension, line_no, "unknown dimension '" + std::string(dim) + "'");
  const auto s = parse_split(split);
  if (!s) throw ParseError(Kind::UnknownSplit, line_no, "unknown split '" + std::string(split) + "'");
  try {
    return Triple{EventPhrase::from_text(event), *d, InferenceTarget::from_text(target),
                  std::string(worker), *s};
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(Kind::BadValue, line_no, e.what());
  }
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#' ||
         line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view chomp(const std::string& line) {
  std::string_view v(line);
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

}  // namespace

std::vector<Triple> parse_atlas_tsv(std::istream& in) {
  std::vector<Triple> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = chomp(raw);
    if (skippable(line)) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 5) {
      throw ParseError(Kind::ColumnCount, line_no,
                       "expected 5 tab-separated columns, found " + std::to_string(cols.size()));
    }
    out.push_back(make_triple(cols[0], cols[1], cols[2], cols[3], cols[4], line_no));
  }
  return out;
}

void write_atlas_tsv(const std::vector<Triple>& triples, std::ostream& out) {
  for (const auto& t : triples) {
    out << t.event.text() << '\t' << dimension_name(t.dimension) << '\t' << t.target.text()
        << '\t' << split_name(t.split) << '\t' << t.worker_id << '\n';
  }
}

std::vector<Triple> parse_atlas_jsonl(std::istream& in) {
  std::vector<Triple> out;
  std::string raw;
  std::size_t line_no = 0;
  static constexpr const char* kKeys[] = {"event", "dimension", "target", "split", "worker_id"};
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = chomp(raw);
    if (skippable(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(Kind::BadValue, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || j.size() != 5) {
      throw ParseError(Kind::ColumnCount, line_no, "expected an object with exactly 5 keys");
    }
    for (const char* k : kKeys) {
      if (!j.contains(k) || !j[k].is_string()) {
        throw ParseError(Kind::ColumnCount, line_no, std::string("missing string key '") + k + "'");
      }
    }
    out.push_back(make_triple(j["event"].get<std::string>(), j["dimension"].get<std::string>(),
                              j["target"].get<std::string>(), j["split"].get<std::string>(),
                              j["worker_id"].get<std::string>(), line_no));
  }
  return out;
}

void write_atlas_jsonl(const std::vector<Triple>& triples, std::ostream& out) {
  for (const auto& t : triples) {
    nlohmann::ordered_json j;
    j["event"] = t.event.text();
    j["dimension"] = dimension_name(t.dimension);
    j["target"] = t.target.text();
    j["split"] = split_name(t.split);
    j["worker_id"] = t.worker_id;
    out << j.dump() << '\n';
  }
}

void canonical_order(std::vector<Triple>& triples) {
  auto key = [](const Triple& t) {
    return std::make_tuple(t.event.text(), dimension_name(t.dimension), t.target.text(),
                           split_name(t.split), std::cref(t.worker_id));
  };
  std::stable_sort(triples.begin(), triples.end(),
                   [&](const Triple& a, const Triple& b) { return key(a) < key(b); });
}

namespace {
bool is_jsonl(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".json";
}
}  // namespace

std::vector<Triple> load_atlas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open atlas file " + path.string());
  try {
    return is_jsonl(path) ? parse_atlas_jsonl(in) : parse_atlas_tsv(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_atlas(const std::vector<Triple>& triples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write atlas file " + path.string());
  if (is_jsonl(path)) {
    write_atlas_jsonl(triples, out);
  } else {
    write_atlas_tsv(triples, out);
  }
}

}  // namespace atlas
