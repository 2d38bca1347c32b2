#include "coldoc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coldoc/errors.hpp"

namespace coldoc {

namespace {

std::string word_for(std::size_t index) { return "w" + std::to_string(index); }

}  // namespace

RawCorpus synth_generate(const SynthConfig& cfg) {
  if (cfg.topic_sharpness < 0.0 || cfg.topic_sharpness > 1.0) {
    throw config_error("synth: topic_sharpness must lie in [0, 1], got " +
                       std::to_string(cfg.topic_sharpness));
  }
  if (cfg.class_overlap < 0.0 || cfg.class_overlap >= 1.0) {
    throw config_error("synth: class_overlap must lie in [0, 1), got " +
                       std::to_string(cfg.class_overlap));
  }
  if (cfg.doc_topic_fraction <= 0.0 || cfg.doc_topic_fraction > 1.0) {
    throw config_error("synth: doc_topic_fraction must lie in (0, 1], got " +
                       std::to_string(cfg.doc_topic_fraction));
  }
  if (cfg.n_classes == 0 || cfg.docs_per_class == 0 || cfg.sections_per_doc == 0 ||
      cfg.chunks_per_section == 0 || cfg.chunk_len == 0) {
    throw config_error("synth: all counts must be >= 1");
  }
  if (cfg.vocab_size <= cfg.n_classes * 10) {
    throw config_error("synth: vocab_size must exceed 10 * n_classes to leave room for "
                       "topic and background tokens");
  }

  // background half, then a chain of (possibly overlapping) class pools
  std::size_t background = cfg.vocab_size / 2;
  std::size_t topic_region = cfg.vocab_size - background;
  double step_frac = 1.0 - cfg.class_overlap;
  std::size_t pool =
      std::max<std::size_t>(1, std::size_t(double(topic_region) /
                                           (1.0 + double(cfg.n_classes - 1) * step_frac)));
  std::size_t step = cfg.n_classes > 1
                         ? (topic_region - pool) / std::max<std::size_t>(1, cfg.n_classes - 1)
                         : 0;
  std::size_t doc_pool = std::max<std::size_t>(1, std::size_t(std::llround(
                                                      double(pool) * cfg.doc_topic_fraction)));

  Rng rng(cfg.seed);
  RawCorpus corpus;
  std::size_t tokens_per_section = cfg.chunks_per_section * cfg.chunk_len;

  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    std::size_t pool_lo = background + c * step;
    for (std::size_t d = 0; d < cfg.docs_per_class; ++d) {
      // each document activates its own subset of the class pool
      std::vector<std::size_t> active(pool);
      for (std::size_t i = 0; i < pool; ++i) active[i] = pool_lo + i;
      rng.shuffle(active);
      active.resize(doc_pool);

      RawDocument doc;
      doc.id = "c" + std::to_string(c) + "_d" + std::to_string(d);
      doc.label = static_cast<int>(c);
      for (std::size_t s = 0; s < cfg.sections_per_doc; ++s) {
        std::string text;
        for (std::size_t t = 0; t < tokens_per_section; ++t) {
          std::size_t w;
          if (rng.uniform() < cfg.topic_sharpness) {
            w = active[rng.index(active.size())];
          } else {
            w = rng.index(background);
          }
          if (!text.empty()) text.push_back(' ');
          text += word_for(w);
        }
        doc.parts.push_back({"s" + std::to_string(s), std::move(text)});
      }
      corpus.push_back(std::move(doc));
    }
  }
  return corpus;
}

}  // namespace coldoc
