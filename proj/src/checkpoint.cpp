#include "atlas/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'A', 'T', 'L', 'S', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("checkpoint is truncated");
  return value;
}

nlohmann::ordered_json config_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["variant"] = variant_name(c.variant);
  j["embed_dim"] = c.embed_dim;
  j["enc_hidden"] = c.enc_hidden;
  j["dec_hidden"] = c.dec_hidden;
  j["max_decode_len"] = c.max_decode_len;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["clip_norm"] = c.clip_norm;
  j["init_scale"] = c.init_scale;
  j["freeze_embeddings"] = c.freeze_embeddings;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  const auto v = parse_variant(j.at("variant").get<std::string>());
  if (!v) throw DataError("checkpoint names an unknown variant");
  c.variant = *v;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.enc_hidden = j.at("enc_hidden").get<int>();
  c.dec_hidden = j.at("dec_hidden").get<int>();
  c.max_decode_len = j.at("max_decode_len").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.init_scale = j.at("init_scale").get<double>();
  c.freeze_embeddings = j.at("freeze_embeddings").get<bool>();
  return c;
}

}  // namespace

void write_checkpoint(const ModelParams& params, const Vocabulary& vocab, std::ostream& out) {
  if (params.vocab_size() != vocab.size()) throw DataError("vocabulary size does not match the model");
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointVersion;
  header["variant"] = variant_name(params.config().variant);
  header["config"] = config_json(params.config());
  header["vocabulary"] = vocab.tokens();
  auto manifest = nlohmann::ordered_json::array();
  const auto tensors = params.tensors();
  for (const auto& t : tensors) {
    manifest.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  header["tensors"] = std::move(manifest);
  const std::string text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    for (Eigen::Index i = 0; i < t.size(); ++i) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t.data[i]));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError("not a checkpoint file");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = get<std::uint64_t>(in);
  if (len > (1ULL << 32)) throw DataError("checkpoint header is implausibly large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("checkpoint is truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }

  try {
    Vocabulary vocab = Vocabulary::from_tokens(header.at("vocabulary").get<std::vector<std::string>>());
    ModelParams params = ModelParams::zeros(config_from_json(header.at("config")), vocab.size());
    auto tensors = params.tensors();
    const auto& manifest = header.at("tensors");
    if (manifest.size() != tensors.size()) throw DataError("checkpoint tensor count mismatch");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const auto& m = manifest[k];
      if (m.at("name").get<std::string>() != tensors[k].name || m.at("rows").get<Eigen::Index>() != tensors[k].rows ||
          m.at("cols").get<Eigen::Index>() != tensors[k].cols) {
        throw DataError("checkpoint tensor '" + m.at("name").get<std::string>() + "' does not match the model layout");
      }
      for (Eigen::Index i = 0; i < tensors[k].size(); ++i) {
        tensors[k].data[i] = std::bit_cast<double>(get<std::uint64_t>(in));
      }
    }
    return {std::move(params), std::move(vocab)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(params, vocab, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace atlas
