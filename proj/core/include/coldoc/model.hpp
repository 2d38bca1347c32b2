#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coldoc/corpus.hpp"
#include "coldoc/embeddings.hpp"
#include "coldoc/encoder.hpp"
#include "coldoc/rng.hpp"
#include "coldoc/tensor.hpp"

namespace coldoc {

/// Ablation variants:
///   full    - sections + structural embeddings + chunkwise attention +
///             Bi-LSTM + supervised contrastive loss
///   no_aug  - whole documents (no sectioning, no structural embeddings)
///   no_lstm - mean chunk aggregation, no chunkwise attention
///   no_cl   - cosine regression over document pairs instead of the
///             contrastive objective (implies no_aug's input treatment)
enum class Variant { full, no_aug, no_lstm, no_cl };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // config_error on unknown

struct TrainConfig {
  Variant variant = Variant::full;
  int batch_size = 8;  // documents per batch
  int sections = 2;    // n_p
  int chunk_len = 32;

  int d_model = 32;
  int layers = 2;
  int enc_heads = 2;
  int d_ff = 64;
  int cw_heads = 2;
  int cw_head_dim = 16;
  int d_lstm = 32;
  int d_proj = 16;
  int max_sections = 8;
  int max_chunks = 32;

  double tau = 0.5;
  double lr = 1e-3;
  double weight_decay = 0.01;
  int epochs = 30;
  std::uint64_t seed = 1;
  bool normalize_projection = true;
  int max_section_tokens = 0;  // 0 = unlimited
  int vocab_min_freq = 1;
  int pairs_per_doc = 8;
  std::string corpus_path;

  /// Effective section count after variant constraints (1 for the
  /// document-level variants).
  int effective_sections() const;
  bool uses_sections() const;
  bool uses_structural() const;
  EncodeOptions encode_options() const;
};

/// Throws config_error on invalid or inconsistent settings.
void validate(const TrainConfig& cfg);

/// Ordered named parameter registry; the same order drives optimizer state
/// and checkpoint layout.
class ParamSet {
 public:
  Tensor add(const std::string& name, std::vector<std::size_t> shape, Rng& rng, double stddev);
  Tensor add_zeros(const std::string& name, std::vector<std::size_t> shape);

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  Tensor find(const std::string& name) const;  // undefined tensor when absent
  std::size_t total_size() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

/// A trainable (or trained) model: every learnable tensor registered in
/// `params`, with the embedding tables and encoder weights viewing the same
/// storage. The vocabulary rides along so checkpoints are self-contained.
struct Model {
  TrainConfig config;
  Vocabulary vocab;
  ParamSet params;
  EmbeddingTables tables;
  EncoderParams encoder;
};

/// Deterministic parameter initialization from config.seed.
Model build_model(const TrainConfig& cfg, Vocabulary vocab);

}  // namespace coldoc
