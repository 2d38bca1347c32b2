#pragma once

#include <cstddef>

#include "coldoc/corpus.hpp"
#include "coldoc/rng.hpp"

namespace coldoc {

/// Synthetic labeled corpus. The word space splits into a shared background
/// half and a topic region; each class owns a topic pool in that region,
/// adjacent pools overlapping by class_overlap. Every document activates a
/// random doc_topic_fraction of its class pool and draws each token from
/// mixture(topic_sharpness * doc subset, (1 - topic_sharpness) * background).
/// Same-class documents therefore share only part of their topic vocabulary
/// and neighboring classes share some of theirs, which keeps desk-scale
/// matching from collapsing into trivially separable bags of words.
/// class_overlap 0 gives fully disjoint class vocabularies; sharpness 0
/// removes all label signal.
struct SynthConfig {
  std::size_t n_classes = 4;
  std::size_t docs_per_class = 40;
  std::size_t vocab_size = 200;
  std::size_t sections_per_doc = 2;
  std::size_t chunks_per_section = 2;
  std::size_t chunk_len = 32;
  double topic_sharpness = 0.7;
  double class_overlap = 0.75;
  double doc_topic_fraction = 0.3;
  std::uint64_t seed = 7;
};

RawCorpus synth_generate(const SynthConfig& cfg);

}  // namespace coldoc
