#include "coldoc/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace coldoc {

namespace {

/// RMS-style pre-norm: unit-normalize each row and rescale by sqrt(d) so
/// entries keep O(1) magnitude.
Tensor row_norm(const Tensor& x) {
  double d = static_cast<double>(x.shape().back());
  return scale(l2_normalize(x), std::sqrt(d));
}

/// Additive key mask: 0 for real tokens, -1e9 for PAD, as a [1, len] row
/// broadcast over query rows.
Tensor key_mask_row(const std::vector<bool>& pad_mask) {
  std::size_t n = pad_mask.size();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = pad_mask[i] ? 0.0 : -1e9;
  return Tensor::from_data({1, n}, std::move(m));
}

/// Multi-head scaled dot-product self-attention over x [T, d_model].
Tensor self_attention(const Tensor& x, const TransformerLayerParams& layer,
                      std::size_t heads, const Tensor& key_mask) {
  std::size_t d_model = x.shape()[1];
  std::size_t head_dim = d_model / heads;
  Tensor q = matmul(x, layer.wq);
  Tensor k = matmul(x, layer.wk);
  Tensor v = matmul(x, layer.wv);
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = slice(q, 1, h * head_dim, head_dim);
    Tensor kh = slice(k, 1, h * head_dim, head_dim);
    Tensor vh = slice(v, 1, h * head_dim, head_dim);
    Tensor logits = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(double(head_dim)));
    logits = add(logits, key_mask);
    Tensor weights = softmax(logits, 1);
    outs.push_back(matmul(weights, vh));
  }
  return matmul(concat(outs, 1), layer.wo);
}

Tensor feed_forward(const Tensor& x, const TransformerLayerParams& layer) {
  Tensor h = tanh(add(matmul(x, layer.w1), layer.b1));
  return add(matmul(h, layer.w2), layer.b2);
}

/// Single-direction LSTM; returns the final hidden state [1, H].
Tensor lstm_final_state(const std::vector<Tensor>& seq, const Tensor& wx, const Tensor& wh,
                        const Tensor& b, std::size_t hidden) {
  Tensor h = Tensor::zeros({1, hidden});
  Tensor c = Tensor::zeros({1, hidden});
  for (const Tensor& x : seq) {
    Tensor xr = reshape(x, {1, x.size()});
    Tensor gates = add(add(matmul(xr, wx), matmul(h, wh)), b);
    Tensor ig = sigmoid(slice(gates, 1, 0, hidden));
    Tensor fg = sigmoid(slice(gates, 1, hidden, hidden));
    Tensor gg = tanh(slice(gates, 1, 2 * hidden, hidden));
    Tensor og = sigmoid(slice(gates, 1, 3 * hidden, hidden));
    c = add(mul(fg, c), mul(ig, gg));
    h = mul(og, tanh(c));
  }
  return h;
}

}  // namespace

std::vector<std::vector<double>> AttentionRecord::head_mean() const {
  std::vector<std::vector<double>> out(n_query, std::vector<double>(n_key, 0.0));
  for (std::size_t q = 0; q < n_query; ++q) {
    for (std::size_t k = 0; k < n_key; ++k) {
      double s = 0.0;
      for (std::size_t h = 0; h < heads; ++h) s += at(h, q, k);
      out[q][k] = s / static_cast<double>(heads);
    }
  }
  return out;
}

Tensor encode_chunk(const EmbeddedChunk& ec, const EncoderParams& params) {
  std::size_t n_real = 0;
  for (bool b : ec.pad_mask) n_real += b ? 1 : 0;
  if (n_real == 0) {
    throw std::logic_error("encode_chunk: chunk has no real tokens");
  }

  Tensor x = ec.vectors;
  Tensor kmask = key_mask_row(ec.pad_mask);
  for (const TransformerLayerParams& layer : params.layers) {
    x = add(x, self_attention(row_norm(x), layer, params.enc_heads, kmask));
    x = add(x, feed_forward(row_norm(x), layer));
  }

  // mean over real token states
  std::size_t len = ec.pad_mask.size();
  std::vector<double> mcol(len);
  for (std::size_t i = 0; i < len; ++i) mcol[i] = ec.pad_mask[i] ? 1.0 : 0.0;
  Tensor mask_col = Tensor::from_data({len, 1}, std::move(mcol));
  return scale(sum(mul(x, mask_col), 0), 1.0 / static_cast<double>(n_real));
}

ChunkwiseResult chunkwise_attention(const std::vector<Tensor>& query_chunks,
                                    const std::vector<Tensor>& key_chunks,
                                    const EncoderParams& params) {
  if (query_chunks.empty() || key_chunks.empty()) {
    throw std::logic_error("chunkwise_attention: both sections must be non-empty");
  }
  if (!params.has_chunkwise()) {
    throw std::logic_error("chunkwise_attention: parameters not configured");
  }
  std::size_t n_q = query_chunks.size();
  std::size_t n_k = key_chunks.size();
  std::size_t heads = params.cw_heads;
  std::size_t hd = params.cw_head_dim;

  Tensor xq = stack_rows(query_chunks);  // [n_q, d_model]
  Tensor xk = stack_rows(key_chunks);    // [n_k, d_model]
  Tensor q = matmul(xq, params.cw_wq);
  Tensor k = matmul(xk, params.cw_wk);
  Tensor v = matmul(xk, params.cw_wv);

  AttentionRecord rec;
  rec.heads = heads;
  rec.n_query = n_q;
  rec.n_key = n_k;
  rec.weights.resize(heads * n_q * n_k);

  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = slice(q, 1, h * hd, hd);
    Tensor kh = slice(k, 1, h * hd, hd);
    Tensor vh = slice(v, 1, h * hd, hd);
    Tensor weights = softmax(scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(double(hd))), 1);
    const auto& w = weights.values();
    std::copy(w.begin(), w.end(), rec.weights.begin() + h * n_q * n_k);
    outs.push_back(matmul(weights, vh));
  }
  Tensor mixed = matmul(concat(outs, 1), params.cw_wo);  // [n_q, d_model]

  ChunkwiseResult result;
  result.record = std::move(rec);
  result.attended.reserve(n_q);
  for (std::size_t i = 0; i < n_q; ++i) {
    result.attended.push_back(reshape(slice(mixed, 0, i, 1), {params.d_model}));
  }
  return result;
}

Tensor aggregate_section(const std::vector<Tensor>& chunk_seq, const EncoderParams& params) {
  if (chunk_seq.empty()) {
    throw std::logic_error("aggregate_section: empty chunk sequence");
  }
  if (!params.has_lstm()) {
    throw std::logic_error("aggregate_section: recurrent parameters not configured");
  }
  Tensor hf = lstm_final_state(chunk_seq, params.fwd_wx, params.fwd_wh, params.fwd_b,
                               params.d_lstm);
  std::vector<Tensor> rev(chunk_seq.rbegin(), chunk_seq.rend());
  Tensor hb = lstm_final_state(rev, params.bwd_wx, params.bwd_wh, params.bwd_b, params.d_lstm);
  return reshape(concat({hf, hb}, 1), {2 * params.d_lstm});
}

Tensor project(const Tensor& z_tilde, const EncoderParams& params, bool normalize) {
  std::size_t in = params.proj_w.shape()[0];
  if (z_tilde.size() != in) {
    throw std::invalid_argument("project: input length " + std::to_string(z_tilde.size()) +
                                " does not match projection rows " + std::to_string(in));
  }
  Tensor z = add(matmul(reshape(z_tilde, {1, in}), params.proj_w), params.proj_b);
  z = reshape(z, {params.proj_w.shape()[1]});
  return normalize ? l2_normalize(z) : z;
}

namespace {

std::vector<Tensor> encode_section_chunks(const Section& section, std::size_t p,
                                          const EmbeddingTables& tables,
                                          const EncoderParams& params) {
  std::vector<Tensor> reps;
  reps.reserve(section.chunks.size());
  for (const Chunk& c : section.chunks) {
    reps.push_back(encode_chunk(embed_chunk(c, p, tables), params));
  }
  return reps;
}

Tensor aggregate_or_mean(const std::vector<Tensor>& seq, const EncoderParams& params,
                         bool use_lstm) {
  if (use_lstm) return aggregate_section(seq, params);
  Tensor m = stack_rows(seq);
  return mean(m, 0);
}

}  // namespace

SectionRep encode_section(const Section& section, std::size_t p, const EmbeddingTables& tables,
                          const EncoderParams& params, const EncodeOptions& opts,
                          const Section* partner, std::size_t partner_p,
                          AttentionRecord* record_out) {
  std::vector<Tensor> reps = encode_section_chunks(section, p, tables, params);
  if (opts.use_attention && partner != nullptr) {
    std::vector<Tensor> kv = encode_section_chunks(*partner, partner_p, tables, params);
    ChunkwiseResult cw = chunkwise_attention(reps, kv, params);
    cw.record.query_section = p;
    cw.record.key_section = partner_p;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      reps[i] = add(reps[i], cw.attended[i]);
    }
    if (record_out) *record_out = std::move(cw.record);
  }
  SectionRep rep;
  rep.z_tilde = aggregate_or_mean(reps, params, opts.use_lstm);
  rep.z = project(rep.z_tilde, params, opts.normalize);
  rep.section_id = p;
  return rep;
}

DocumentEncoding encode_document_sections(const Document& doc, const EmbeddingTables& tables,
                                          const EncoderParams& params,
                                          const EncodeOptions& opts) {
  if (doc.sections.empty()) {
    throw std::logic_error("encode_document_sections: document has no sections");
  }
  DocumentEncoding enc;
  std::size_t n_p = doc.sections.size();

  std::vector<std::vector<Tensor>> per_section;
  per_section.reserve(n_p);
  for (std::size_t p = 0; p < n_p; ++p) {
    auto reps = encode_section_chunks(doc.sections[p], doc.sections[p].section_id, tables,
                                      params);
    for (const Tensor& r : reps) {
      enc.chunk_reps.push_back(r);
      enc.chunk_section.push_back(p);
    }
    per_section.push_back(std::move(reps));
  }

  bool attend = opts.use_attention && n_p >= 2 && params.has_chunkwise();
  std::vector<std::vector<Tensor>> attended = per_section;
  if (attend) {
    // cyclic pairing: section p queries section p+1, the last queries the first
    for (std::size_t p = 0; p < n_p; ++p) {
      std::size_t kv = (p + 1) % n_p;
      ChunkwiseResult cw = chunkwise_attention(per_section[p], per_section[kv], params);
      cw.record.query_section = doc.sections[p].section_id;
      cw.record.key_section = doc.sections[kv].section_id;
      for (std::size_t i = 0; i < attended[p].size(); ++i) {
        attended[p][i] = add(per_section[p][i], cw.attended[i]);
      }
      enc.attention.push_back(std::move(cw.record));
    }
  }

  for (std::size_t p = 0; p < n_p; ++p) {
    SectionRep rep;
    rep.z_tilde = aggregate_or_mean(attended[p], params, opts.use_lstm);
    rep.z = project(rep.z_tilde, params, opts.normalize);
    rep.doc_id = doc.id;
    rep.section_id = doc.sections[p].section_id;
    enc.sections.push_back(std::move(rep));
  }
  return enc;
}

Tensor encode_document(const Document& doc, const EmbeddingTables& tables,
                       const EncoderParams& params, const EncodeOptions& opts) {
  if (doc.sections.empty()) {
    throw std::logic_error("encode_document: document has no sections");
  }
  // one pseudo-section: section id 0, chunk ids re-assigned in concat order
  std::vector<Tensor> reps;
  std::size_t next_chunk_id = 0;
  for (const Section& s : doc.sections) {
    for (const Chunk& c : s.chunks) {
      Chunk flat = c;
      flat.chunk_id = next_chunk_id++;
      reps.push_back(encode_chunk(embed_chunk(flat, 0, tables), params));
    }
  }
  Tensor z_tilde = aggregate_or_mean(reps, params, opts.use_lstm);
  return project(z_tilde, params, opts.normalize);
}

}  // namespace coldoc
