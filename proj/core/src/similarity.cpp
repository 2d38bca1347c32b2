#include "coldoc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coldoc/io.hpp"
#include "coldoc/svg.hpp"
#include "json.hpp"

namespace coldoc {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: vector lengths differ (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    throw std::invalid_argument("cosine: zero vector");
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

bool classify(double score, double threshold) { return score > threshold; }

SimilarityReport compare_documents(const Document& s, const Document& t, const Model& model) {
  const EncodeOptions opts = model.config.encode_options();
  SimilarityReport rep;
  rep.id_s = s.id;
  rep.id_t = t.id;
  rep.label_s = s.label;
  rep.label_t = t.label;

  // document level: inference path
  Tensor zs = encode_document(s, model.tables, model.encoder, opts);
  Tensor zt = encode_document(t, model.tables, model.encoder, opts);
  rep.doc_score = cosine(zs.values(), zt.values());

  // section + chunk level: training path per document
  DocumentEncoding es = encode_document_sections(s, model.tables, model.encoder, opts);
  DocumentEncoding et = encode_document_sections(t, model.tables, model.encoder, opts);

  std::vector<const SectionRep*> secs;
  std::vector<std::vector<double>> sec_z;
  auto add_doc_sections = [&](const Document& doc, const DocumentEncoding& enc,
                              std::size_t owner) {
    for (std::size_t p = 0; p < enc.sections.size(); ++p) {
      secs.push_back(&enc.sections[p]);
      sec_z.push_back(enc.sections[p].z.values());
      rep.section_owner.push_back(owner);
      rep.section_names.push_back(doc.id + ":" + doc.sections[p].name);
    }
  };
  add_doc_sections(s, es, 0);
  add_doc_sections(t, et, 1);

  std::size_t n_sec = secs.size();
  rep.section_matrix.assign(n_sec, std::vector<double>(n_sec, 0.0));
  for (std::size_t i = 0; i < n_sec; ++i) {
    for (std::size_t j = i; j < n_sec; ++j) {
      double v = cosine(sec_z[i], sec_z[j]);
      rep.section_matrix[i][j] = v;
      rep.section_matrix[j][i] = v;
    }
  }

  // chunk level: pre-attention chunk vectors from both documents
  std::vector<std::vector<double>> chunk_vecs;
  auto add_doc_chunks = [&](const Document& doc, const DocumentEncoding& enc,
                            std::size_t sec_base) {
    std::size_t c = 0;  // chunk_reps is in section-concat order
    for (std::size_t p = 0; p < doc.sections.size(); ++p) {
      for (std::size_t q = 0; q < doc.sections[p].chunks.size(); ++q, ++c) {
        chunk_vecs.push_back(enc.chunk_reps[c].values());
        rep.chunk_section.push_back(sec_base + p);
        rep.chunk_names.push_back(doc.id + ":" + doc.sections[p].name + "." +
                                  std::to_string(q));
      }
    }
  };
  add_doc_chunks(s, es, 0);
  add_doc_chunks(t, et, s.sections.size());

  std::size_t n_chunks = chunk_vecs.size();
  rep.chunk_matrix.assign(n_chunks, std::vector<double>(n_chunks, 0.0));
  for (std::size_t i = 0; i < n_chunks; ++i) {
    for (std::size_t j = i; j < n_chunks; ++j) {
      double v = cosine(chunk_vecs[i], chunk_vecs[j]);
      rep.chunk_matrix[i][j] = v;
      rep.chunk_matrix[j][i] = v;
    }
  }

  // trained cross-section attention for every ordered section pair
  if (model.encoder.has_chunkwise()) {
    std::vector<std::vector<Tensor>> sec_chunks(n_sec);
    for (std::size_t c = 0; c < es.chunk_reps.size(); ++c) {
      sec_chunks[es.chunk_section[c]].push_back(es.chunk_reps[c]);
    }
    std::size_t base = s.sections.size();
    for (std::size_t c = 0; c < et.chunk_reps.size(); ++c) {
      sec_chunks[base + et.chunk_section[c]].push_back(et.chunk_reps[c]);
    }
    for (std::size_t qi = 0; qi < n_sec; ++qi) {
      for (std::size_t ki = 0; ki < n_sec; ++ki) {
        if (qi == ki) continue;
        ChunkwiseResult cw = chunkwise_attention(sec_chunks[qi], sec_chunks[ki], model.encoder);
        OverlayEntry entry;
        entry.query_section = qi;
        entry.key_section = ki;
        entry.weights = cw.record.head_mean();
        rep.attention_overlay.push_back(std::move(entry));
      }
    }
  }
  return rep;
}

std::string report_to_json(const SimilarityReport& rep) {
  nlohmann::json j;
  j["ids"] = {{"s", rep.id_s}, {"t", rep.id_t}};
  j["labels"] = {{"s", rep.label_s}, {"t", rep.label_t}};
  j["doc_score"] = rep.doc_score;
  j["section_matrix"] = rep.section_matrix;
  j["chunk_matrix"] = rep.chunk_matrix;
  j["section_names"] = rep.section_names;
  j["section_owner"] = rep.section_owner;
  j["chunk_names"] = rep.chunk_names;
  j["chunk_section"] = rep.chunk_section;
  j["attention_overlay"] = nlohmann::json::array();
  for (const OverlayEntry& e : rep.attention_overlay) {
    j["attention_overlay"].push_back({{"query_section", e.query_section},
                                      {"key_section", e.key_section},
                                      {"weights", e.weights}});
  }
  return j.dump(2);
}

std::vector<std::string> write_report(const SimilarityReport& rep, const std::string& out_dir) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    std::string path = out_dir + "/" + name;
    atomic_write_file(path, content);
    written.push_back(path);
  };
  emit("report.json", report_to_json(rep));

  std::vector<std::vector<double>> doc_matrix = {{1.0, rep.doc_score}, {rep.doc_score, 1.0}};
  std::vector<std::string> doc_labels = {rep.id_s, rep.id_t};
  emit("document.svg", svg_heatmap(doc_matrix, doc_labels, doc_labels, "document similarity"));
  emit("sections.svg",
       svg_heatmap(rep.section_matrix, rep.section_names, rep.section_names,
                   "section similarity"));
  emit("chunks.svg",
       svg_heatmap(rep.chunk_matrix, rep.chunk_names, rep.chunk_names, "chunk similarity"));
  return written;
}

}  // namespace coldoc
