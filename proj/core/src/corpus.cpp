#include "coldoc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "coldoc/errors.hpp"
#include "coldoc/io.hpp"
#include "json.hpp"

namespace coldoc {

// --- JSON-lines I/O -------------------------------------------------------

RawCorpus load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open corpus file: " + path);
  RawCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    RawDocument doc;
    try {
      doc.id = j.at("id").get<std::string>();
      doc.label = j.at("label").get<int>();
      for (const auto& s : j.at("sections")) {
        doc.parts.push_back({s.at("name").get<std::string>(), s.at("text").get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw data_error(path + ":" + std::to_string(line_no) + ": bad document record: " +
                       e.what());
    }
    if (doc.label < 0) {
      throw data_error(path + ":" + std::to_string(line_no) + ": negative label");
    }
    if (doc.parts.empty()) {
      throw data_error(path + ":" + std::to_string(line_no) + ": document has no sections");
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

void save_corpus_jsonl(const RawCorpus& corpus, const std::string& path) {
  std::string out;
  for (const RawDocument& doc : corpus) {
    nlohmann::json j;
    j["id"] = doc.id;
    j["label"] = doc.label;
    j["sections"] = nlohmann::json::array();
    for (const RawSection& s : doc.parts) {
      j["sections"].push_back({{"name", s.name}, {"text", s.text}});
    }
    out += j.dump();
    out += "\n";
  }
  atomic_write_file(path, out);
}

// --- tokenization -----------------------------------------------------------

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    bool word_char = std::isalnum(c) || c >= 0x80;
    if (word_char) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary Vocabulary::build(const RawCorpus& corpus, std::size_t min_frequency) {
  std::map<std::string, std::size_t> counts;  // ordered: deterministic ties
  for (const RawDocument& doc : corpus) {
    for (const RawSection& part : doc.parts) {
      for (std::string& w : split_words(part.text)) ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(entries.size());
  for (auto& [tok, cnt] : entries) {
    if (cnt >= min_frequency) tokens.push_back(tok);
  }
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  v.tokens_.reserve(tokens.size() + 2);
  v.tokens_.push_back("<pad>");
  v.tokens_.push_back("<unk>");
  for (std::string& t : tokens) v.tokens_.push_back(std::move(t));
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.ids_[v.tokens_[i]] = i;
  return v;
}

std::size_t Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw std::out_of_range("token_of: id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

std::vector<std::size_t> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  for (const std::string& w : split_words(text)) ids.push_back(vocab.id_of(w));
  return ids;
}

// --- structured types ---------------------------------------------------------

std::size_t Chunk::real_tokens() const {
  std::size_t n = 0;
  for (bool b : pad_mask) n += b ? 1 : 0;
  return n;
}

std::vector<std::size_t> Section::tokens() const {
  std::vector<std::size_t> out;
  for (const Chunk& c : chunks) {
    for (std::size_t i = 0; i < c.token_ids.size(); ++i) {
      if (c.pad_mask[i]) out.push_back(c.token_ids[i]);
    }
  }
  return out;
}

std::size_t Document::total_chunks() const {
  std::size_t n = 0;
  for (const Section& s : sections) n += s.chunks.size();
  return n;
}

// --- augmentation / chunking -----------------------------------------------

std::vector<std::vector<std::size_t>> augment(const RawDocument& doc, const Vocabulary& vocab,
                                              std::size_t n_sections) {
  if (n_sections == 0) throw config_error("augment: section count must be >= 1");

  std::vector<std::vector<std::size_t>> sections;
  if (doc.parts.size() == n_sections) {
    // part-per-section mapping, original order preserved
    for (const RawSection& p : doc.parts) sections.push_back(tokenize(p.text, vocab));
  } else {
    std::vector<std::size_t> all;
    for (const RawSection& p : doc.parts) {
      auto ids = tokenize(p.text, vocab);
      all.insert(all.end(), ids.begin(), ids.end());
    }
    if (all.size() < n_sections) {
      throw data_error("augment: document '" + doc.id + "' has " + std::to_string(all.size()) +
                       " tokens, cannot form " + std::to_string(n_sections) + " sections");
    }
    // even token split; first (all.size() % n) sections get one extra token
    std::size_t base = all.size() / n_sections;
    std::size_t extra = all.size() % n_sections;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n_sections; ++s) {
      std::size_t len = base + (s < extra ? 1 : 0);
      sections.emplace_back(all.begin() + pos, all.begin() + pos + len);
      pos += len;
    }
  }
  for (const auto& s : sections) {
    if (s.empty()) {
      throw data_error("augment: document '" + doc.id + "' yields an empty section");
    }
  }
  return sections;
}

std::vector<Chunk> chunk_section(const std::vector<std::size_t>& tokens, std::size_t chunk_len) {
  if (chunk_len == 0) throw config_error("chunk_section: chunk_len must be >= 1");
  std::size_t n_chunks = std::max<std::size_t>(1, (tokens.size() + chunk_len - 1) / chunk_len);
  std::vector<Chunk> chunks(n_chunks);
  for (std::size_t q = 0; q < n_chunks; ++q) {
    Chunk& c = chunks[q];
    c.chunk_id = q;
    c.token_ids.assign(chunk_len, Vocabulary::kPad);
    c.pad_mask.assign(chunk_len, false);
    std::size_t start = q * chunk_len;
    std::size_t len = std::min(chunk_len, tokens.size() - std::min(tokens.size(), start));
    for (std::size_t i = 0; i < len; ++i) {
      c.token_ids[i] = tokens[start + i];
      c.pad_mask[i] = true;
    }
  }
  return chunks;
}

Document build_document(const RawDocument& raw, const Vocabulary& vocab,
                        std::size_t n_sections, std::size_t chunk_len,
                        std::size_t max_section_tokens) {
  Document doc;
  doc.id = raw.id;
  doc.label = raw.label;
  auto token_sections = augment(raw, vocab, n_sections);
  for (std::size_t p = 0; p < token_sections.size(); ++p) {
    auto& toks = token_sections[p];
    if (max_section_tokens > 0 && toks.size() > max_section_tokens) {
      toks.resize(max_section_tokens);
    }
    Section sec;
    sec.name = raw.parts.size() == n_sections ? raw.parts[p].name : "part" + std::to_string(p);
    sec.section_id = p;
    sec.chunks = chunk_section(toks, chunk_len);
    doc.sections.push_back(std::move(sec));
  }
  return doc;
}

Corpus build_corpus(const RawCorpus& raw, const Vocabulary& vocab, std::size_t n_sections,
                    std::size_t chunk_len, std::size_t max_section_tokens) {
  Corpus out;
  out.reserve(raw.size());
  for (const RawDocument& rd : raw) {
    try {
      out.push_back(build_document(rd, vocab, n_sections, chunk_len, max_section_tokens));
    } catch (const data_error& e) {
      std::cerr << "warning: skipping document '" << rd.id << "': " << e.what() << "\n";
    }
  }
  return out;
}

// --- batches -------------------------------------------------------------

AugmentedBatch sample_batch(const Corpus& corpus, std::size_t batch_size, Rng& rng) {
  if (batch_size > corpus.size()) {
    throw data_error("sample_batch: batch size " + std::to_string(batch_size) +
                     " exceeds corpus size " + std::to_string(corpus.size()));
  }
  std::set<int> labels;
  for (const Document& d : corpus) labels.insert(d.label);
  if (labels.size() < 2) {
    std::cerr << "warning: corpus has a single label; contrastive batches have no negatives\n";
  }
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  AugmentedBatch batch;
  for (std::size_t k = 0; k < batch_size; ++k) {
    const Document& doc = corpus[order[k]];
    for (std::size_t p = 0; p < doc.sections.size(); ++p) {
      batch.entries.push_back({order[k], p, doc.label, doc.id});
    }
  }
  return batch;
}

Document perturb_sections(const Document& doc, Rng& rng) {
  if (doc.sections.size() < 2) return doc;
  Document out = doc;
  rng.shuffle(out.sections);
  return out;
}

Document truncate(const Document& doc, std::size_t max_tokens, std::size_t chunk_len) {
  if (max_tokens == 0) throw config_error("truncate: max_tokens must be >= 1");
  Document out;
  out.id = doc.id;
  out.label = doc.label;
  for (const Section& s : doc.sections) {
    auto toks = s.tokens();
    if (toks.size() > max_tokens) toks.resize(max_tokens);
    Section ns;
    ns.name = s.name;
    ns.section_id = s.section_id;
    ns.chunks = chunk_section(toks, chunk_len);
    out.sections.push_back(std::move(ns));
  }
  return out;
}

// --- evaluation pairs -------------------------------------------------------

std::vector<PairExample> make_pairs(const std::vector<int>& labels,
                                    std::size_t partners_per_doc, Rng& rng) {
  std::size_t n = labels.size();
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[labels[i]].push_back(i);

  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<PairExample> pairs;
  auto try_add = [&](std::size_t a, std::size_t b, bool same) {
    if (a == b) return false;
    auto key = std::minmax(a, b);
    if (!used.insert({key.first, key.second}).second) return false;
    pairs.push_back({a, b, same});
    return true;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& same_pool = by_label[labels[i]];
    std::vector<std::size_t> diff_pool;
    for (const auto& [lab, idxs] : by_label) {
      if (lab == labels[i]) continue;
      diff_pool.insert(diff_pool.end(), idxs.begin(), idxs.end());
    }
    std::size_t added_same = 0, attempts = 0;
    while (added_same < partners_per_doc && same_pool.size() > 1 &&
           attempts < partners_per_doc * 8) {
      ++attempts;
      std::size_t j = same_pool[rng.index(same_pool.size())];
      if (try_add(i, j, true)) ++added_same;
    }
    std::size_t added_diff = 0;
    attempts = 0;
    while (added_diff < added_same && !diff_pool.empty() && attempts < partners_per_doc * 8) {
      ++attempts;
      std::size_t j = diff_pool[rng.index(diff_pool.size())];
      if (try_add(i, j, false)) ++added_diff;
    }
  }
  return pairs;
}

}  // namespace coldoc
