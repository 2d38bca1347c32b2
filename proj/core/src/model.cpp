#include "coldoc/model.hpp"

#include <cmath>

#include "coldoc/errors.hpp"

namespace coldoc {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_aug: return "no-aug";
    case Variant::no_lstm: return "no-lstm";
    case Variant::no_cl: return "no-cl";
  }
  return "full";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "no-aug" || name == "no_aug") return Variant::no_aug;
  if (name == "no-lstm" || name == "no_lstm") return Variant::no_lstm;
  if (name == "no-cl" || name == "no_cl") return Variant::no_cl;
  throw config_error("unknown variant '" + name + "' (expected full|no-aug|no-lstm|no-cl)");
}

int TrainConfig::effective_sections() const { return uses_sections() ? sections : 1; }

bool TrainConfig::uses_sections() const {
  return variant == Variant::full || variant == Variant::no_lstm;
}

bool TrainConfig::uses_structural() const {
  return variant == Variant::full || variant == Variant::no_lstm;
}

EncodeOptions TrainConfig::encode_options() const {
  EncodeOptions opts;
  opts.use_attention = variant == Variant::full;
  opts.use_lstm = variant != Variant::no_lstm;
  opts.normalize = normalize_projection;
  return opts;
}

void validate(const TrainConfig& cfg) {
  auto positive = [](long v, const char* name) {
    if (v <= 0) throw config_error(std::string(name) + " must be positive");
  };
  positive(cfg.batch_size, "batch_size");
  positive(cfg.sections, "sections");
  positive(cfg.chunk_len, "chunk_len");
  positive(cfg.d_model, "d_model");
  positive(cfg.enc_heads, "enc_heads");
  positive(cfg.d_ff, "d_ff");
  positive(cfg.cw_heads, "cw_heads");
  positive(cfg.cw_head_dim, "cw_head_dim");
  positive(cfg.d_lstm, "d_lstm");
  positive(cfg.d_proj, "d_proj");
  positive(cfg.max_sections, "max_sections");
  positive(cfg.max_chunks, "max_chunks");
  positive(cfg.epochs, "epochs");
  positive(cfg.pairs_per_doc, "pairs_per_doc");
  if (cfg.layers < 0) throw config_error("layers must be >= 0");
  if (cfg.max_section_tokens < 0) throw config_error("max_section_tokens must be >= 0");
  if (cfg.vocab_min_freq < 1) throw config_error("vocab_min_freq must be >= 1");
  if (!(cfg.tau > 0.0)) throw config_error("tau must be positive");
  if (!(cfg.lr > 0.0)) throw config_error("lr must be positive");
  if (cfg.weight_decay < 0.0) throw config_error("weight_decay must be >= 0");
  if (cfg.d_model % cfg.enc_heads != 0) {
    throw config_error("d_model (" + std::to_string(cfg.d_model) +
                       ") must be divisible by enc_heads (" + std::to_string(cfg.enc_heads) +
                       ")");
  }
  if (cfg.sections > cfg.max_sections) {
    throw config_error("sections exceeds max_sections");
  }
  if (cfg.uses_sections() && cfg.sections < 2) {
    throw config_error("variant '" + variant_name(cfg.variant) + "' requires sections >= 2");
  }
  if (cfg.variant == Variant::no_cl && cfg.batch_size % 2 != 0) {
    throw config_error("variant no-cl builds document pairs; batch_size must be even");
  }
}

Tensor ParamSet::add(const std::string& name, std::vector<std::size_t> shape, Rng& rng,
                     double stddev) {
  Tensor t = Tensor::randn(std::move(shape), rng, stddev, true);
  items_.emplace_back(name, t);
  return t;
}

Tensor ParamSet::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  items_.emplace_back(name, t);
  return t;
}

Tensor ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  return Tensor();
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

Model build_model(const TrainConfig& cfg, Vocabulary vocab) {
  validate(cfg);
  Model m;
  m.config = cfg;
  m.vocab = std::move(vocab);

  Rng rng = Rng(cfg.seed).derive(0x11);
  const double emb_std = 0.1;
  auto fan_std = [](std::size_t fan_in) { return 1.0 / std::sqrt(double(fan_in)); };

  std::size_t d = cfg.d_model;
  m.tables.word = m.params.add("emb.word", {m.vocab.size(), d}, rng, emb_std);
  m.tables.token_pos =
      m.params.add("emb.token_pos", {std::size_t(cfg.chunk_len), d}, rng, emb_std);
  if (cfg.uses_structural()) {
    // zero-initialized: rows for ids the corpus never produces stay neutral,
    // so document-level inference can re-assign chunk ids beyond the
    // training range without injecting untrained noise
    m.tables.chunk_id = m.params.add_zeros("emb.chunk_id", {std::size_t(cfg.max_chunks), d});
    m.tables.section_id =
        m.params.add_zeros("emb.section_id", {std::size_t(cfg.max_sections), d});
  }

  m.encoder.d_model = d;
  m.encoder.enc_heads = cfg.enc_heads;
  // residual-branch outputs (wo, w2, cw_wo) start at zero: every block is
  // the identity at step 0 and learns in, which keeps the tiny-scale
  // optimization from fighting init noise
  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = "enc.layer" + std::to_string(l) + ".";
    TransformerLayerParams layer;
    layer.wq = m.params.add(p + "wq", {d, d}, rng, fan_std(d));
    layer.wk = m.params.add(p + "wk", {d, d}, rng, fan_std(d));
    layer.wv = m.params.add(p + "wv", {d, d}, rng, fan_std(d));
    layer.wo = m.params.add_zeros(p + "wo", {d, d});
    layer.w1 = m.params.add(p + "ff.w1", {d, std::size_t(cfg.d_ff)}, rng, fan_std(d));
    layer.b1 = m.params.add_zeros(p + "ff.b1", {1, std::size_t(cfg.d_ff)});
    layer.w2 = m.params.add_zeros(p + "ff.w2", {std::size_t(cfg.d_ff), d});
    layer.b2 = m.params.add_zeros(p + "ff.b2", {1, d});
    m.encoder.layers.push_back(std::move(layer));
  }

  if (cfg.variant == Variant::full) {
    std::size_t cw = std::size_t(cfg.cw_heads) * std::size_t(cfg.cw_head_dim);
    m.encoder.cw_heads = cfg.cw_heads;
    m.encoder.cw_head_dim = cfg.cw_head_dim;
    m.encoder.cw_wq = m.params.add("cw.wq", {d, cw}, rng, fan_std(d));
    m.encoder.cw_wk = m.params.add("cw.wk", {d, cw}, rng, fan_std(d));
    m.encoder.cw_wv = m.params.add("cw.wv", {d, cw}, rng, fan_std(d));
    m.encoder.cw_wo = m.params.add_zeros("cw.wo", {cw, d});
  }

  std::size_t proj_in;
  if (cfg.variant == Variant::no_lstm) {
    proj_in = d;  // mean aggregation keeps the chunk width
  } else {
    std::size_t h = cfg.d_lstm;
    m.encoder.d_lstm = h;
    // forget-gate bias starts at +1 so early cell states persist
    auto lstm_bias = [&](const std::string& name) {
      Tensor b = m.params.add_zeros(name, {1, 4 * h});
      auto& data = b.raw_data();
      for (std::size_t i = h; i < 2 * h; ++i) data[i] = 1.0;
      return b;
    };
    m.encoder.fwd_wx = m.params.add("lstm.fwd.wx", {d, 4 * h}, rng, fan_std(d));
    m.encoder.fwd_wh = m.params.add("lstm.fwd.wh", {h, 4 * h}, rng, fan_std(h));
    m.encoder.fwd_b = lstm_bias("lstm.fwd.b");
    m.encoder.bwd_wx = m.params.add("lstm.bwd.wx", {d, 4 * h}, rng, fan_std(d));
    m.encoder.bwd_wh = m.params.add("lstm.bwd.wh", {h, 4 * h}, rng, fan_std(h));
    m.encoder.bwd_b = lstm_bias("lstm.bwd.b");
    proj_in = 2 * h;
  }
  m.encoder.proj_w =
      m.params.add("proj.w", {proj_in, std::size_t(cfg.d_proj)}, rng, fan_std(proj_in));
  m.encoder.proj_b = m.params.add_zeros("proj.b", {1, std::size_t(cfg.d_proj)});

  return m;
}

}  // namespace coldoc
