#include "coldoc/embeddings.hpp"

#include <stdexcept>
#include <string>

namespace coldoc {

EmbeddedChunk embed_chunk(const Chunk& chunk, std::size_t section_id,
                          const EmbeddingTables& tables) {
  const std::size_t vocab_rows = tables.word.shape()[0];
  for (std::size_t id : chunk.token_ids) {
    if (id >= vocab_rows) {
      throw std::out_of_range("embed_chunk: token id " + std::to_string(id) +
                              " out of range for word table with " + std::to_string(vocab_rows) +
                              " rows");
    }
  }
  if (chunk.token_ids.size() != tables.token_pos.shape()[0]) {
    throw std::invalid_argument("embed_chunk: chunk length " +
                                std::to_string(chunk.token_ids.size()) +
                                " does not match token position table rows " +
                                std::to_string(tables.token_pos.shape()[0]));
  }

  Tensor rows = gather_rows(tables.word, chunk.token_ids);
  rows = add(rows, tables.token_pos);
  if (tables.structural()) {
    if (chunk.chunk_id >= tables.chunk_id.shape()[0]) {
      throw std::out_of_range("embed_chunk: chunk id " + std::to_string(chunk.chunk_id) +
                              " out of range for chunk table with " +
                              std::to_string(tables.chunk_id.shape()[0]) + " rows");
    }
    if (section_id >= tables.section_id.shape()[0]) {
      throw std::out_of_range("embed_chunk: section id " + std::to_string(section_id) +
                              " out of range for section table with " +
                              std::to_string(tables.section_id.shape()[0]) + " rows");
    }
    rows = add(rows, gather_rows(tables.chunk_id, {chunk.chunk_id}));
    rows = add(rows, gather_rows(tables.section_id, {section_id}));
  }
  return {std::move(rows), chunk.pad_mask, section_id, chunk.chunk_id};
}

}  // namespace coldoc
