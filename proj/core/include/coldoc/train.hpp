#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coldoc/corpus.hpp"
#include "coldoc/metrics.hpp"
#include "coldoc/model.hpp"

namespace coldoc {

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double val_accuracy = 0.0;
  long long wall_ms = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  double threshold = 0.0;  // selected on the validation split
  EvalResult test;         // test-split evaluation at that threshold
};

/// 80-10-10 document split, shuffled deterministically from the seed.
struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};
SplitIndices split_corpus(std::size_t n_docs, std::uint64_t seed);

RawCorpus subset(const RawCorpus& corpus, const std::vector<std::size_t>& indices);

/// Full training run: split, vocabulary from the train split, per-epoch
/// batches / loss / Adam updates, validation accuracy per epoch, final
/// threshold selection and test evaluation. Deterministic from cfg.seed.
/// Throws divergence_error when a batch loss turns non-finite.
TrainResult train(const TrainConfig& cfg, const RawCorpus& corpus);

/// Cosine scores for labeled pairs of documents (inference encoding).
std::vector<LabeledScore> score_pairs(const Model& model, const Corpus& docs,
                                      const std::vector<PairExample>& pairs);

EvalResult evaluate_pairs(const Model& model, const Corpus& docs,
                          const std::vector<PairExample>& pairs, double threshold);

/// Deterministic labeled test pairs for a model/corpus combination, built
/// from the same split the model was trained on.
struct TestBench {
  Corpus docs;
  std::vector<PairExample> pairs;
};
TestBench make_test_bench(const Model& model, const RawCorpus& corpus, int eval_sections);

// --- experiment runners ----------------------------------------------------

struct AblationRow {
  std::string variant;
  EvalResult eval;
};
/// Trains every variant under the base config's seed and budget.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const RawCorpus& corpus);

struct PerturbResult {
  EvalResult clean;
  EvalResult shuffled;
};
/// Evaluates one trained model on clean and on section-shuffled test
/// documents (identical pairs and threshold).
PerturbResult run_perturbation(const Model& model, double threshold, const RawCorpus& corpus,
                               int eval_sections, std::uint64_t shuffle_seed);

struct LengthRow {
  int limit = 0;
  EvalResult eval;
};
/// Trains with per-section token truncation at each limit; evaluation always
/// sees the full documents.
std::vector<LengthRow> run_length_sweep(const TrainConfig& base, const RawCorpus& corpus,
                                        const std::vector<int>& limits);

struct BatchCurve {
  int batch_size = 0;
  std::vector<double> val_accuracy;  // one entry per epoch
};
std::vector<BatchCurve> run_batchsize_sweep(const TrainConfig& base, const RawCorpus& corpus,
                                            const std::vector<int>& sizes);

// --- serialization helpers ---------------------------------------------------

std::string epoch_log_to_jsonl(const std::vector<EpochLog>& log);
std::string eval_result_to_json(const EvalResult& r);

}  // namespace coldoc
