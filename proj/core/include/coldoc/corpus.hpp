#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "coldoc/rng.hpp"

namespace coldoc {

// --- raw (text) side ------------------------------------------------------

struct RawSection {
  std::string name;
  std::string text;
};

/// One labeled document as read from a JSON-lines corpus file.
struct RawDocument {
  std::string id;
  int label = 0;
  std::vector<RawSection> parts;
};

using RawCorpus = std::vector<RawDocument>;

/// JSON-lines corpus I/O. One object per line:
///   {"id": str, "label": int, "sections": [{"name": str, "text": str}]}
RawCorpus load_corpus_jsonl(const std::string& path);
void save_corpus_jsonl(const RawCorpus& corpus, const std::string& path);

// --- tokenization ----------------------------------------------------------

/// Lowercases and splits on whitespace/punctuation; bytes >= 0x80 are kept
/// as word characters so UTF-8 sequences survive intact.
std::vector<std::string> split_words(const std::string& text);

/// Token -> id table with reserved ids 0 = PAD and 1 = UNK. Ids are
/// contiguous; ordering is by descending frequency then lexicographic,
/// so a vocabulary is a pure function of its source text.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary() = default;

  static Vocabulary build(const RawCorpus& corpus, std::size_t min_frequency = 1);
  static Vocabulary from_tokens(std::vector<std::string> tokens);  // ids 2..n+1 in order

  std::size_t size() const { return tokens_.size(); }
  std::size_t id_of(const std::string& token) const;  // UNK when absent
  const std::string& token_of(std::size_t id) const;
  /// Tokens in id order, including the PAD/UNK sentinels.
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

std::vector<std::size_t> tokenize(const std::string& text, const Vocabulary& vocab);

// --- structured (token) side ------------------------------------------------

struct Chunk {
  std::vector<std::size_t> token_ids;  // exactly chunk_len entries, PAD-tail
  std::vector<bool> pad_mask;          // true = real token
  std::size_t chunk_id = 0;            // q, index within the owning section

  std::size_t real_tokens() const;
};

struct Section {
  std::string name;
  std::vector<Chunk> chunks;
  std::size_t section_id = 0;  // p, original index within the document

  /// Real (unpadded) token ids of the section in order.
  std::vector<std::size_t> tokens() const;
};

struct Document {
  std::string id;
  int label = 0;
  std::vector<Section> sections;

  std::size_t total_chunks() const;
};

using Corpus = std::vector<Document>;

/// Splits a raw document into n_sections token sections. When the document
/// has exactly n_sections named parts the mapping is part-per-section;
/// otherwise the concatenated token stream is split evenly. Throws
/// data_error when the document cannot yield n_sections non-empty sections.
std::vector<std::vector<std::size_t>> augment(const RawDocument& doc, const Vocabulary& vocab,
                                              std::size_t n_sections);

/// Non-overlapping fixed-length chunks; the tail chunk is zero-padded.
std::vector<Chunk> chunk_section(const std::vector<std::size_t>& tokens, std::size_t chunk_len);

/// Full pipeline for one document: augment + chunk (+ optional per-section
/// truncation to max_section_tokens real tokens; 0 = unlimited).
Document build_document(const RawDocument& raw, const Vocabulary& vocab,
                        std::size_t n_sections, std::size_t chunk_len,
                        std::size_t max_section_tokens = 0);

/// build_document over a corpus; documents that cannot be sectioned are
/// skipped with a warning on stderr.
Corpus build_corpus(const RawCorpus& raw, const Vocabulary& vocab, std::size_t n_sections,
                    std::size_t chunk_len, std::size_t max_section_tokens = 0);

// --- batches ---------------------------------------------------------------

struct BatchEntry {
  std::size_t doc_index = 0;      // into the sampled corpus
  std::size_t section_index = 0;  // into that document's sections
  int label = 0;
  std::string doc_id;
};

/// n_p entries per sampled document: each section of a document is one
/// contrastive view carrying the document's label.
struct AugmentedBatch {
  std::vector<BatchEntry> entries;
};

/// Draws batch_size documents without replacement and expands each to its
/// sections. Warns on stderr when fewer than two labels are present.
AugmentedBatch sample_batch(const Corpus& corpus, std::size_t batch_size, Rng& rng);

/// Uniformly permutes section order; section_id fields keep the original
/// positions. Single-section documents are returned unchanged.
Document perturb_sections(const Document& doc, Rng& rng);

/// Keeps the first max_tokens real tokens of every section, re-chunked.
Document truncate(const Document& doc, std::size_t max_tokens, std::size_t chunk_len);

// --- evaluation pairs --------------------------------------------------------

struct PairExample {
  std::size_t a = 0;
  std::size_t b = 0;
  bool same_label = false;
};

/// Balanced labeled pairs over doc indices: per document up to
/// partners_per_doc same-label partners and as many different-label ones.
std::vector<PairExample> make_pairs(const std::vector<int>& labels, std::size_t partners_per_doc,
                                    Rng& rng);

}  // namespace coldoc
