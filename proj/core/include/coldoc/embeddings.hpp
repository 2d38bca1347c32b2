#pragma once

#include <cstddef>
#include <vector>

#include "coldoc/corpus.hpp"
#include "coldoc/tensor.hpp"

namespace coldoc {

/// Learned embedding tables for the structure-aware input representation:
/// word identity, token position within a chunk, chunk id within a section,
/// and section id within a document. The chunk/section tables may be left
/// undefined to disable structural information (ablation variants).
struct EmbeddingTables {
  Tensor word;        // [vocab, d_model]
  Tensor token_pos;   // [chunk_len, d_model]
  Tensor chunk_id;    // [max_chunks, d_model]
  Tensor section_id;  // [max_sections, d_model]

  bool structural() const { return chunk_id.defined() && section_id.defined(); }
};

/// One chunk lifted to per-token input vectors, with padding and structural
/// provenance carried along.
struct EmbeddedChunk {
  Tensor vectors;  // [chunk_len, d_model]
  std::vector<bool> pad_mask;
  std::size_t section_id = 0;
  std::size_t chunk_id = 0;
};

/// row r = word[token r] + token_pos[r] + chunk_id[q] + section_id[p].
/// The two structural terms are skipped when the tables are disabled.
EmbeddedChunk embed_chunk(const Chunk& chunk, std::size_t section_id,
                          const EmbeddingTables& tables);

}  // namespace coldoc
