#include "atlas/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/rng.hpp"
#include "atlas/text.hpp"
#include "atlas/vocab.hpp"

namespace atlas {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Single9: return "single9";
    case Variant::EventInvolEvent: return "event-invol";
    case Variant::EventPersonXY: return "event-xy";
    case Variant::EventPrePost: return "event-prepost";
    case Variant::NearestNeighbor: return "nearest-neighbor";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
  for (Variant v : {Variant::Single9, Variant::EventInvolEvent, Variant::EventPersonXY,
                    Variant::EventPrePost, Variant::NearestNeighbor}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (embed_dim < 1 || enc_hidden < 2 || dec_hidden < 1) throw DataError("model sizes must be positive");
  if (enc_hidden % 2 != 0) throw DataError("enc_hidden must be even (two directions)");
  if (max_decode_len < 1) throw DataError("max_decode_len must be >= 1");
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  if (epochs < 0) throw DataError("epochs must be >= 0");
  if (!(learning_rate >= 0.0)) throw DataError("learning_rate must be >= 0");
}

std::map<Dimension, std::string> encoder_grouping(Variant variant) {
  std::map<Dimension, std::string> out;
  for (Dimension d : kAllDimensions) {
    const TaxonomyCoords c = classify_dimension(d);
    switch (variant) {
      case Variant::Single9:
        out[d] = std::string(dimension_name(d));
        break;
      case Variant::EventInvolEvent:
        out[d] = c.volition == Volition::Voluntary ? "voluntary" : "involuntary";
        break;
      case Variant::EventPersonXY:
        out[d] = c.subject == Subject::Agent ? "agent" : "theme";
        break;
      case Variant::EventPrePost:
        // The stative dimension has no place in a cause/effect split.
        if (c.causal_category == CausalCategory::Cause) out[d] = "pre";
        else if (c.causal_category == CausalCategory::Effect) out[d] = "post";
        break;
      case Variant::NearestNeighbor:
        throw DataError("the nearest-neighbor baseline has no encoders");
    }
  }
  return out;
}

GruParams GruParams::zeros(int input, int hidden) {
  return {Eigen::MatrixXd::Zero(3 * hidden, input), Eigen::MatrixXd::Zero(3 * hidden, hidden),
          Eigen::VectorXd::Zero(3 * hidden)};
}

ModelParams ModelParams::zeros(const ModelConfig& config, std::size_t vocab_size) {
  config.validate();
  if (vocab_size < 1) throw DataError("vocabulary must be non-empty");
  ModelParams p;
  p.config_ = config;
  p.vocab_size_ = vocab_size;
  p.grouping_ = encoder_grouping(config.variant);
  const auto V = static_cast<Eigen::Index>(vocab_size);
  const int half = config.enc_hidden / 2;
  p.embedding_ = Eigen::MatrixXd::Zero(V, config.embed_dim);
  for (const auto& [dim, enc_id] : p.grouping_) {
    if (!p.encoders_.contains(enc_id)) {
      p.encoders_.emplace(enc_id, EncoderParams{
                                      GruParams::zeros(config.embed_dim, half),
                                      GruParams::zeros(config.embed_dim, half),
                                      Eigen::MatrixXd::Zero(config.dec_hidden, config.enc_hidden),
                                      Eigen::VectorXd::Zero(config.dec_hidden),
                                  });
    }
    p.decoders_.emplace(dim, DecoderParams{GruParams::zeros(config.embed_dim, config.dec_hidden),
                                           Eigen::MatrixXd::Zero(V, config.dec_hidden),
                                           Eigen::VectorXd::Zero(V)});
  }
  return p;
}

ModelParams ModelParams::random(const ModelConfig& config, std::size_t vocab_size, Rng& rng) {
  ModelParams p = zeros(config, vocab_size);
  const double a = config.init_scale;
  for (auto& t : p.tensors()) {
    if (t.name.ends_with(".b")) continue;
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(-a, a);
  }
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams g = *this;
  for (auto& t : g.tensors()) std::fill(t.data, t.data + t.size(), 0.0);
  return g;
}

std::vector<Dimension> ModelParams::dimensions() const {
  std::vector<Dimension> out;
  for (const auto& [d, id] : grouping_) out.push_back(d);
  return out;
}

const std::string& ModelParams::encoder_id(Dimension d) const {
  auto it = grouping_.find(d);
  if (it == grouping_.end()) {
    throw DataError(std::string(dimension_name(d)) + " is not part of the " +
                    std::string(variant_name(config_.variant)) + " model");
  }
  return it->second;
}

EncoderParams& ModelParams::encoder_for(Dimension d) { return encoders_.at(encoder_id(d)); }
const EncoderParams& ModelParams::encoder_for(Dimension d) const { return encoders_.at(encoder_id(d)); }

DecoderParams& ModelParams::decoder(Dimension d) {
  encoder_id(d);
  return decoders_.at(d);
}
const DecoderParams& ModelParams::decoder(Dimension d) const {
  encoder_id(d);
  return decoders_.at(d);
}

namespace {

template <typename Ref, typename Self>
std::vector<Ref> collect(Self& self) {
  std::vector<Ref> out;
  auto add = [&out](std::string name, auto& m) {
    out.push_back(Ref{std::move(name), m.data(), m.rows(), m.cols()});
  };
  add("embedding", self.embedding());
  for (auto& [id, enc] : self.encoders()) {
    const std::string p = "encoder/" + id + "/";
    add(p + "bridge.W", enc.bridge_W);
    add(p + "bridge.b", enc.bridge_b);
    add(p + "bwd.U", enc.backward.U);
    add(p + "bwd.W", enc.backward.W);
    add(p + "bwd.b", enc.backward.b);
    add(p + "fwd.U", enc.forward.U);
    add(p + "fwd.W", enc.forward.W);
    add(p + "fwd.b", enc.forward.b);
  }
  for (auto& [dim, dec] : self.decoders()) {
    const std::string p = "decoder/" + std::string(dimension_name(dim)) + "/";
    add(p + "cell.U", dec.cell.U);
    add(p + "cell.W", dec.cell.W);
    add(p + "cell.b", dec.cell.b);
    add(p + "out.W", dec.out_W);
    add(p + "out.b", dec.out_b);
  }
  std::sort(out.begin(), out.end(), [](const Ref& a, const Ref& b) { return a.name < b.name; });
  return out;
}

}  // namespace

std::vector<TensorRef> ModelParams::tensors() { return collect<TensorRef>(*this); }
std::vector<ConstTensorRef> ModelParams::tensors() const { return collect<ConstTensorRef>(*this); }

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t.data[i])) return false;
    }
  }
  return true;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (!(a.config_ == b.config_) || a.vocab_size_ != b.vocab_size_ || a.grouping_ != b.grouping_) {
    return false;
  }
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].name != tb[i].name || ta[i].rows != tb[i].rows || ta[i].cols != tb[i].cols) return false;
    // Bitwise: -0.0 and 0.0 differ, NaNs compare by payload.
    if (std::memcmp(ta[i].data, tb[i].data, sizeof(double) * static_cast<std::size_t>(ta[i].size())) != 0) {
      return false;
    }
  }
  return true;
}

std::size_t load_static_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                   ModelParams& params) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  const auto width = params.embedding().cols();
  std::size_t set = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(ParseError::Kind::ColumnCount, line_no, "expected token<TAB>values");
    }
    const std::string token = line.substr(0, tab);
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> row;
    double x;
    while (values >> x) row.push_back(x);
    if (!values.eof()) throw ParseError(ParseError::Kind::BadValue, line_no, "non-numeric embedding value");
    if (static_cast<Eigen::Index>(row.size()) != width) {
      throw ParseError(ParseError::Kind::BadValue, line_no,
                       "embedding width " + std::to_string(row.size()) + " != model width " +
                           std::to_string(width));
    }
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    for (Eigen::Index c = 0; c < width; ++c) params.embedding()(id, c) = row[static_cast<std::size_t>(c)];
    ++set;
  }
  return set;
}

}  // namespace atlas
