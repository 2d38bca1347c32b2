#pragma once

#include <string>
#include <vector>

#include "coldoc/corpus.hpp"
#include "coldoc/model.hpp"

namespace coldoc {

/// Cosine similarity clamped to [-1, 1]. Throws on zero vectors.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// relevant iff score > threshold (strict; a score equal to the threshold
/// is irrelevant).
bool classify(double score, double threshold);

/// Head-averaged cross-section attention weights for one ordered pair of
/// sections; each row is a distribution over the key section's chunks.
struct OverlayEntry {
  std::size_t query_section = 0;  // global section index (doc s first, then t)
  std::size_t key_section = 0;
  std::vector<std::vector<double>> weights;
};

/// Three-level similarity between two documents plus attention overlay.
/// Section/chunk matrices are indexed over the union of both documents'
/// sections/chunks (document s first).
struct SimilarityReport {
  std::string id_s, id_t;
  int label_s = 0, label_t = 0;
  double doc_score = 0.0;
  std::vector<std::vector<double>> section_matrix;
  std::vector<std::vector<double>> chunk_matrix;
  std::vector<OverlayEntry> attention_overlay;
  std::vector<std::string> section_names;    // "<doc>:<section>"
  std::vector<std::size_t> section_owner;    // 0 = s, 1 = t
  std::vector<std::string> chunk_names;      // "<doc>:<section>.<chunk>"
  std::vector<std::size_t> chunk_section;    // global section index per chunk
};

/// Document score from the inference path; section representations from
/// the training path (within-document cyclic attention); chunk scores from
/// pre-attention chunk vectors. The overlay holds trained cross-section
/// attention for every ordered section pair, including cross-document
/// pairs, when the model has chunkwise-attention weights.
SimilarityReport compare_documents(const Document& s, const Document& t, const Model& model);

std::string report_to_json(const SimilarityReport& report);

/// Writes report.json plus one heatmap per level:
/// document.svg, sections.svg, chunks.svg. Returns the paths written.
std::vector<std::string> write_report(const SimilarityReport& report,
                                      const std::string& out_dir);

}  // namespace coldoc
