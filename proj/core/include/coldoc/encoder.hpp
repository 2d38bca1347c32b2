#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coldoc/corpus.hpp"
#include "coldoc/embeddings.hpp"
#include "coldoc/tensor.hpp"

namespace coldoc {

struct TransformerLayerParams {
  Tensor wq, wk, wv, wo;  // [d_model, d_model]
  Tensor w1, b1;          // [d_model, d_ff], [1, d_ff]
  Tensor w2, b2;          // [d_ff, d_model], [1, d_model]
};

/// All learnable encoder weights. The chunkwise-attention and recurrent
/// blocks are optional: ablation variants leave them undefined.
struct EncoderParams {
  std::size_t d_model = 0;
  std::size_t enc_heads = 1;
  std::vector<TransformerLayerParams> layers;

  // chunkwise cross-section attention (bias-free projections + output mixer)
  std::size_t cw_heads = 0;
  std::size_t cw_head_dim = 0;
  Tensor cw_wq, cw_wk, cw_wv;  // [d_model, cw_heads * cw_head_dim]
  Tensor cw_wo;                // [cw_heads * cw_head_dim, d_model]

  // bidirectional recurrent aggregator, gate order (i, f, g, o)
  std::size_t d_lstm = 0;
  Tensor fwd_wx, fwd_wh, fwd_b;  // [d_model, 4H], [H, 4H], [1, 4H]
  Tensor bwd_wx, bwd_wh, bwd_b;

  // projection head
  Tensor proj_w, proj_b;  // [proj_in, d_proj], [1, d_proj]

  bool has_chunkwise() const { return cw_wq.defined(); }
  bool has_lstm() const { return fwd_wx.defined(); }
};

/// How a document is encoded. Derived from the training variant.
struct EncodeOptions {
  bool use_attention = true;   // cross-section chunkwise attention (training path)
  bool use_lstm = true;        // false: mean of chunk vectors instead of Bi-LSTM
  bool normalize = true;       // L2-normalize projections
};

/// Cross-section attention probabilities, head-resolved.
/// weights are laid out [head][query chunk][key chunk].
struct AttentionRecord {
  std::size_t query_section = 0;
  std::size_t key_section = 0;
  std::size_t heads = 0;
  std::size_t n_query = 0;
  std::size_t n_key = 0;
  std::vector<double> weights;

  double at(std::size_t head, std::size_t q, std::size_t k) const {
    return weights[(head * n_query + q) * n_key + k];
  }
  /// Head-averaged weight matrix, rows = query chunks.
  std::vector<std::vector<double>> head_mean() const;
};

struct SectionRep {
  Tensor z_tilde;  // aggregated section state
  Tensor z;        // projected (optionally unit-norm) representation
  std::string doc_id;
  std::size_t section_id = 0;
};

/// Pre-norm transformer stack over one embedded chunk followed by masked
/// mean pooling; PAD positions are excluded from attention keys and from
/// the pooled output.
Tensor encode_chunk(const EmbeddedChunk& ec, const EncoderParams& params);

struct ChunkwiseResult {
  std::vector<Tensor> attended;  // one [d_model] vector per query chunk
  AttentionRecord record;
};

/// Chunks of the query section attend over chunks of the key/value section:
/// softmax(Q K^T / sqrt(d)) V per head, heads concatenated and mixed back
/// to d_model. Inputs are chunk vectors from encode_chunk.
ChunkwiseResult chunkwise_attention(const std::vector<Tensor>& query_chunks,
                                    const std::vector<Tensor>& key_chunks,
                                    const EncoderParams& params);

/// Bi-LSTM over the chunk vector sequence; returns the concatenation of the
/// final forward and final backward hidden states (length 2 * d_lstm).
Tensor aggregate_section(const std::vector<Tensor>& chunk_seq, const EncoderParams& params);

/// Affine map to the contrastive embedding, optionally L2-normalized.
Tensor project(const Tensor& z_tilde, const EncoderParams& params, bool normalize);

/// Full section pipeline: embed + encode chunks, optional cross-attention
/// against a partner section (residual add), aggregate, project.
SectionRep encode_section(const Section& section, std::size_t p, const EmbeddingTables& tables,
                          const EncoderParams& params, const EncodeOptions& opts,
                          const Section* partner = nullptr, std::size_t partner_p = 0,
                          AttentionRecord* record_out = nullptr);

/// Training-path encoding of a full document: every section encoded with
/// cyclic cross-section attention (section p queries section p+1, the last
/// queries the first). Single-section documents skip attention.
struct DocumentEncoding {
  std::vector<Tensor> chunk_reps;         // pre-attention chunk vectors, concat order
  std::vector<std::size_t> chunk_section; // owning section index per chunk rep
  std::vector<SectionRep> sections;
  std::vector<AttentionRecord> attention; // one record per attending section pair
};
DocumentEncoding encode_document_sections(const Document& doc, const EmbeddingTables& tables,
                                          const EncoderParams& params, const EncodeOptions& opts);

/// Inference path: all chunks concatenated into one pseudo-section with
/// section id 0 and chunk ids re-assigned 0..n-1; attention skipped.
Tensor encode_document(const Document& doc, const EmbeddingTables& tables,
                       const EncoderParams& params, const EncodeOptions& opts);

}  // namespace coldoc
