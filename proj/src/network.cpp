#include "atlas/network.hpp"

#include <cmath>

#include "atlas/error.hpp"

namespace atlas {

namespace {

using Eigen::VectorXd;

VectorXd sigmoid(const VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct GruCache {
  VectorXd x;
  VectorXd h_prev;
  VectorXd z;
  VectorXd r;
  VectorXd n;
};

VectorXd gru_forward(const GruParams& p, const VectorXd& x, const VectorXd& h, GruCache* cache) {
  const Eigen::Index H = p.hidden();
  const VectorXd wx = p.W * x + p.b;
  const VectorXd z = sigmoid(wx.segment(0, H) + p.U.topRows(H) * h);
  const VectorXd r = sigmoid(wx.segment(H, H) + p.U.middleRows(H, H) * h);
  const VectorXd n = (wx.segment(2 * H, H) + p.U.bottomRows(H) * r.cwiseProduct(h)).array().tanh().matrix();
  VectorXd out = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h);
  if (cache) *cache = {x, h, z, r, n};
  return out;
}

// Backprop one step. Accumulates parameter gradients into g and returns
// (d/dx, d/dh_prev) through the out-parameters.
void gru_backward(const GruParams& p, const GruCache& c, const VectorXd& dh_next, GruParams& g,
                  VectorXd& dx, VectorXd& dh_prev) {
  const Eigen::Index H = p.hidden();
  const VectorXd dz = dh_next.cwiseProduct(c.h_prev - c.n);
  const VectorXd dn = dh_next.cwiseProduct((1.0 - c.z.array()).matrix());
  dh_prev = dh_next.cwiseProduct(c.z);

  const VectorXd da_n = dn.cwiseProduct((1.0 - c.n.array().square()).matrix());
  const VectorXd rh = c.r.cwiseProduct(c.h_prev);
  const VectorXd d_rh = p.U.bottomRows(H).transpose() * da_n;
  const VectorXd dr = d_rh.cwiseProduct(c.h_prev);
  dh_prev += d_rh.cwiseProduct(c.r);

  const VectorXd da_r = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
  const VectorXd da_z = dz.cwiseProduct(c.z.cwiseProduct((1.0 - c.z.array()).matrix()));

  VectorXd da(3 * H);
  da << da_z, da_r, da_n;
  g.W.noalias() += da * c.x.transpose();
  g.b += da;
  g.U.topRows(H).noalias() += da_z * c.h_prev.transpose();
  g.U.middleRows(H, H).noalias() += da_r * c.h_prev.transpose();
  g.U.bottomRows(H).noalias() += da_n * rh.transpose();

  dx = p.W.transpose() * da;
  dh_prev.noalias() += p.U.topRows(H).transpose() * da_z;
  dh_prev.noalias() += p.U.middleRows(H, H).transpose() * da_r;
}

VectorXd embed(const ModelParams& params, int id) {
  return params.embedding().row(id).transpose();
}

void require_ids(const ModelParams& params, std::span<const int> ids, const char* what) {
  const auto V = static_cast<int>(params.vocab_size());
  for (int id : ids) {
    if (id < 0 || id >= V) throw DataError(std::string(what) + " id " + std::to_string(id) + " outside vocabulary");
  }
}

}  // namespace

Eigen::VectorXd gru_step(const GruParams& cell, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  return gru_forward(cell, x, h, nullptr);
}

Eigen::VectorXd encode(const ModelParams& params, const std::string& encoder_id,
                       std::span<const int> event) {
  if (event.empty()) throw DataError("cannot encode an empty event");
  require_ids(params, event, "event");
  const EncoderParams& enc = params.encoders().at(encoder_id);
  const int half = enc.forward.hidden();
  VectorXd hf = VectorXd::Zero(half);
  for (int id : event) hf = gru_forward(enc.forward, embed(params, id), hf, nullptr);
  VectorXd hb = VectorXd::Zero(half);
  for (auto it = event.rbegin(); it != event.rend(); ++it) {
    hb = gru_forward(enc.backward, embed(params, *it), hb, nullptr);
  }
  VectorXd h(2 * half);
  h << hf, hb;
  return h;
}

Eigen::VectorXd initial_decoder_state(const ModelParams& params, Dimension dim,
                                      std::span<const int> event) {
  const EncoderParams& enc = params.encoder_for(dim);
  return enc.bridge_W * encode(params, params.encoder_id(dim), event) + enc.bridge_b;
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> decode_logits(const ModelParams& params, Dimension dim,
                                                          const Eigen::VectorXd& hidden,
                                                          int prev_token) {
  const DecoderParams& dec = params.decoder(dim);
  if (hidden.size() != dec.cell.hidden()) throw DataError("decoder state has the wrong length");
  require_ids(params, std::span<const int>(&prev_token, 1), "previous token");
  VectorXd next = gru_forward(dec.cell, embed(params, prev_token), hidden, nullptr);
  VectorXd logits = dec.out_W * next + dec.out_b;
  return {std::move(logits), std::move(next)};
}

DecodeStep decode_step(const ModelParams& params, Dimension dim, const Eigen::VectorXd& hidden,
                       int prev_token) {
  auto [logits, next] = decode_logits(params, dim, hidden, prev_token);
  const double m = logits.maxCoeff();
  VectorXd e = (logits.array() - m).exp().matrix();
  e /= e.sum();
  return {std::move(e), std::move(next)};
}

void check_instance(const ModelParams& params, const TrainingInstance& instance) {
  if (instance.event.empty()) throw DataError("training instance has an empty event");
  if (instance.target.size() < 2) throw DataError("training target needs <bos> and at least one more id");
  require_ids(params, instance.event, "event");
  require_ids(params, instance.target, "target");
  params.encoder_id(instance.dimension);
}

double sequence_loss(const ModelParams& params, const TrainingInstance& instance) {
  check_instance(params, instance);
  const DecoderParams& dec = params.decoder(instance.dimension);
  VectorXd s = initial_decoder_state(params, instance.dimension, instance.event);
  const std::size_t m = instance.target.size() - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    s = gru_forward(dec.cell, embed(params, instance.target[i]), s, nullptr);
    const VectorXd lp = log_softmax(dec.out_W * s + dec.out_b);
    total -= lp(instance.target[i + 1]);
  }
  return total / static_cast<double>(m);
}

double sequence_loss_and_gradient(const ModelParams& params, const TrainingInstance& instance,
                                  ModelParams& grad, double weight) {
  check_instance(params, instance);
  const Dimension dim = instance.dimension;
  const EncoderParams& enc = params.encoder_for(dim);
  const DecoderParams& dec = params.decoder(dim);
  EncoderParams& genc = grad.encoder_for(dim);
  DecoderParams& gdec = grad.decoder(dim);
  Eigen::MatrixXd& gE = grad.embedding();

  // Encoder forward with caches.
  const std::size_t n = instance.event.size();
  const int half = enc.forward.hidden();
  std::vector<GruCache> fwd(n), bwd(n);
  VectorXd hf = VectorXd::Zero(half);
  for (std::size_t i = 0; i < n; ++i) hf = gru_forward(enc.forward, embed(params, instance.event[i]), hf, &fwd[i]);
  VectorXd hb = VectorXd::Zero(half);
  for (std::size_t i = 0; i < n; ++i) {
    hb = gru_forward(enc.backward, embed(params, instance.event[n - 1 - i]), hb, &bwd[i]);
  }
  VectorXd h(2 * half);
  h << hf, hb;
  VectorXd s = enc.bridge_W * h + enc.bridge_b;

  // Decoder forward.
  const std::size_t m = instance.target.size() - 1;
  std::vector<GruCache> dcache(m);
  std::vector<VectorXd> states(m);
  std::vector<VectorXd> probs(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    s = gru_forward(dec.cell, embed(params, instance.target[i]), s, &dcache[i]);
    states[i] = s;
    const VectorXd lp = log_softmax(dec.out_W * s + dec.out_b);
    total -= lp(instance.target[i + 1]);
    probs[i] = lp.array().exp().matrix();
  }
  const double loss = total / static_cast<double>(m);
  const double scale = weight / static_cast<double>(m);

  // Decoder backward through time.
  VectorXd ds = VectorXd::Zero(dec.cell.hidden());
  VectorXd dx, dprev;
  for (std::size_t k = m; k-- > 0;) {
    VectorXd dlogits = probs[k] * scale;
    dlogits(instance.target[k + 1]) -= scale;
    gdec.out_W.noalias() += dlogits * states[k].transpose();
    gdec.out_b += dlogits;
    ds.noalias() += dec.out_W.transpose() * dlogits;
    gru_backward(dec.cell, dcache[k], ds, gdec.cell, dx, dprev);
    gE.row(instance.target[k]) += dx.transpose();
    ds = std::move(dprev);
  }

  // Bridge.
  genc.bridge_W.noalias() += ds * h.transpose();
  genc.bridge_b += ds;
  const VectorXd dh = enc.bridge_W.transpose() * ds;

  // Encoder directions.
  VectorXd dhf = dh.head(half);
  for (std::size_t i = n; i-- > 0;) {
    gru_backward(enc.forward, fwd[i], dhf, genc.forward, dx, dprev);
    gE.row(instance.event[i]) += dx.transpose();
    dhf = std::move(dprev);
  }
  VectorXd dhb = dh.tail(half);
  for (std::size_t i = n; i-- > 0;) {
    gru_backward(enc.backward, bwd[i], dhb, genc.backward, dx, dprev);
    gE.row(instance.event[n - 1 - i]) += dx.transpose();
    dhb = std::move(dprev);
  }
  return loss;
}

}  // namespace atlas
