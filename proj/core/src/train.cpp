#include "coldoc/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "coldoc/errors.hpp"
#include "coldoc/loss.hpp"
#include "coldoc/optim.hpp"
#include "coldoc/similarity.hpp"
#include "json.hpp"

namespace coldoc {

namespace {

// rng stream salts
constexpr std::uint64_t kSaltTrain = 0x7472;
constexpr std::uint64_t kSaltValPairs = 0x7670;
constexpr std::uint64_t kSaltTestPairs = 0x7470;

std::vector<int> labels_of(const Corpus& docs) {
  std::vector<int> out;
  out.reserve(docs.size());
  for (const Document& d : docs) out.push_back(d.label);
  return out;
}

/// Document batches for one epoch.
///   - Sectioned variants shuffle and partition: sibling sections guarantee
///     every anchor a positive, so any batch mix is valid.
///   - no_cl pairs consecutive shuffled documents; targets come from label
///     equality, whatever mix the shuffle produced.
///   - no_aug runs document-level contrastive loss, so batches are packed
///     from same-label pairs to keep every label represented twice.
std::vector<std::vector<std::size_t>> epoch_batches(const Corpus& train_docs,
                                                    const TrainConfig& cfg, Rng& rng) {
  std::size_t n = train_docs.size();
  std::size_t batch = std::size_t(cfg.batch_size);
  std::vector<std::vector<std::size_t>> batches;

  if (cfg.uses_sections() || cfg.variant == Variant::no_cl) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      std::size_t end = std::min(start + batch, n);
      if (end - start < 2) break;  // a trailing single document cannot pair up
      batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
  }

  // same-label document pairs, then packed into batches
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[train_docs[i].label].push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (auto& [label, idxs] : by_label) {
    rng.shuffle(idxs);
    for (std::size_t k = 0; k + 1 < idxs.size(); k += 2) {
      pairs.emplace_back(idxs[k], idxs[k + 1]);
    }
  }
  rng.shuffle(pairs);
  std::size_t pairs_per_batch = std::max<std::size_t>(1, batch / 2);
  for (std::size_t start = 0; start + pairs_per_batch <= pairs.size();
       start += pairs_per_batch) {
    std::vector<std::size_t> b;
    for (std::size_t k = 0; k < pairs_per_batch; ++k) {
      b.push_back(pairs[start + k].first);
      b.push_back(pairs[start + k].second);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

Tensor batch_loss(const std::vector<std::size_t>& batch, const Corpus& train_docs,
                  const Model& model, const EncodeOptions& opts) {
  const TrainConfig& cfg = model.config;

  if (cfg.variant == Variant::no_cl) {
    // consecutive docs form pairs; cosine regression to +-1
    Tensor total;
    for (std::size_t k = 0; k + 1 < batch.size(); k += 2) {
      const Document& a = train_docs[batch[k]];
      const Document& b = train_docs[batch[k + 1]];
      Tensor za = encode_document(a, model.tables, model.encoder, opts);
      Tensor zb = encode_document(b, model.tables, model.encoder, opts);
      Tensor term = cosine_objective(za, zb, a.label == b.label);
      total = total.defined() ? add(total, term) : term;
    }
    return total;
  }

  LossBatch lb;
  lb.tau = cfg.tau;
  for (std::size_t idx : batch) {
    const Document& doc = train_docs[idx];
    DocumentEncoding enc = encode_document_sections(doc, model.tables, model.encoder, opts);
    for (SectionRep& rep : enc.sections) {
      lb.z.push_back(rep.z);
      lb.labels.push_back(doc.label);
    }
  }
  return supcon_loss(lb);
}

double validation_accuracy(const std::vector<LabeledScore>& scored) {
  if (scored.empty()) return 0.0;
  double thr = 0.0;
  try {
    thr = select_threshold(scored);
  } catch (const data_error&) {
    // degenerate validation scores; fall back to a fixed threshold
  }
  return compute_metrics(scored, thr).accuracy;
}

}  // namespace

SplitIndices split_corpus(std::size_t n_docs, std::uint64_t seed) {
  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;
  Rng rng = Rng(seed).derive(0x73706c69);
  rng.shuffle(order);
  SplitIndices s;
  std::size_t n_train = n_docs * 8 / 10;
  std::size_t n_val = n_docs / 10;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

RawCorpus subset(const RawCorpus& corpus, const std::vector<std::size_t>& indices) {
  RawCorpus out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(corpus[i]);
  return out;
}

std::vector<LabeledScore> score_pairs(const Model& model, const Corpus& docs,
                                      const std::vector<PairExample>& pairs) {
  const EncodeOptions opts = model.config.encode_options();
  std::vector<std::vector<double>> reps(docs.size());
  std::vector<bool> have(docs.size(), false);
  auto rep_of = [&](std::size_t i) -> const std::vector<double>& {
    if (!have[i]) {
      reps[i] = encode_document(docs[i], model.tables, model.encoder, opts).values();
      have[i] = true;
    }
    return reps[i];
  };
  std::vector<LabeledScore> scored;
  scored.reserve(pairs.size());
  for (const PairExample& p : pairs) {
    scored.push_back({cosine(rep_of(p.a), rep_of(p.b)), p.same_label});
  }
  return scored;
}

EvalResult evaluate_pairs(const Model& model, const Corpus& docs,
                          const std::vector<PairExample>& pairs, double threshold) {
  if (pairs.empty()) throw data_error("evaluate_pairs: no pairs");
  return compute_metrics(score_pairs(model, docs, pairs), threshold);
}

TestBench make_test_bench(const Model& model, const RawCorpus& corpus, int eval_sections) {
  const TrainConfig& cfg = model.config;
  SplitIndices split = split_corpus(corpus.size(), cfg.seed);
  TestBench bench;
  bench.docs = build_corpus(subset(corpus, split.test), model.vocab,
                            std::size_t(eval_sections), std::size_t(cfg.chunk_len));
  Rng pair_rng = Rng(cfg.seed).derive(kSaltTestPairs);
  bench.pairs = make_pairs(labels_of(bench.docs), std::size_t(cfg.pairs_per_doc), pair_rng);
  return bench;
}

TrainResult train(const TrainConfig& cfg, const RawCorpus& corpus) {
  validate(cfg);
  if (corpus.empty()) throw data_error("train: empty corpus");

  SplitIndices split = split_corpus(corpus.size(), cfg.seed);
  RawCorpus train_raw = subset(corpus, split.train);
  Vocabulary vocab = Vocabulary::build(train_raw, std::size_t(cfg.vocab_min_freq));

  std::size_t n_p = std::size_t(cfg.effective_sections());
  Corpus train_docs = build_corpus(train_raw, vocab, n_p, std::size_t(cfg.chunk_len),
                                   std::size_t(cfg.max_section_tokens));
  Corpus val_docs = build_corpus(subset(corpus, split.val), vocab, n_p,
                                 std::size_t(cfg.chunk_len));
  if (train_docs.size() < std::size_t(cfg.batch_size)) {
    throw data_error("train: " + std::to_string(train_docs.size()) +
                     " training documents cannot fill batches of " +
                     std::to_string(cfg.batch_size));
  }

  Model model = build_model(cfg, std::move(vocab));
  AdamState adam = AdamState::init(model.params);
  const EncodeOptions opts = cfg.encode_options();

  Rng train_rng = Rng(cfg.seed).derive(kSaltTrain);
  Rng val_pair_rng = Rng(cfg.seed).derive(kSaltValPairs);
  std::vector<PairExample> val_pairs =
      make_pairs(labels_of(val_docs), std::size_t(cfg.pairs_per_doc), val_pair_rng);

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    auto batches = epoch_batches(train_docs, cfg, train_rng);

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      Tensor loss = batch_loss(batches[bi], train_docs, model, opts);
      double lv = loss.value();
      if (!std::isfinite(lv)) {
        throw divergence_error("loss diverged: epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(bi) + ", seed " + std::to_string(cfg.seed));
      }
      model.params.zero_grad();
      loss.backward();
      adam_step(model.params, adam, cfg.lr, cfg.weight_decay);
      epoch_loss += lv;
      ++n_batches;
    }

    double val_acc = 0.0;
    if (!val_pairs.empty()) {
      val_acc = validation_accuracy(score_pairs(model, val_docs, val_pairs));
    }
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    result.log.push_back({epoch, n_batches ? epoch_loss / double(n_batches) : 0.0, val_acc,
                          static_cast<long long>(wall)});
  }

  // final threshold from validation, final metrics from the test split
  double threshold = 0.0;
  if (!val_pairs.empty()) {
    try {
      threshold = select_threshold(score_pairs(model, val_docs, val_pairs));
    } catch (const data_error&) {
      threshold = 0.0;
    }
  }
  result.threshold = threshold;

  TestBench bench = make_test_bench(model, corpus, cfg.effective_sections());
  if (!bench.pairs.empty()) {
    result.test = evaluate_pairs(model, bench.docs, bench.pairs, threshold);
  }
  result.model = std::move(model);
  return result;
}

// --- experiments ------------------------------------------------------------

std::vector<AblationRow> run_ablation(const TrainConfig& base, const RawCorpus& corpus) {
  std::vector<AblationRow> rows;
  for (Variant v : {Variant::full, Variant::no_aug, Variant::no_lstm, Variant::no_cl}) {
    TrainConfig cfg = base;
    cfg.variant = v;
    TrainResult r = train(cfg, corpus);
    rows.push_back({variant_name(v), r.test});
  }
  return rows;
}

PerturbResult run_perturbation(const Model& model, double threshold, const RawCorpus& corpus,
                               int eval_sections, std::uint64_t shuffle_seed) {
  TestBench bench = make_test_bench(model, corpus, eval_sections);
  PerturbResult out;
  out.clean = evaluate_pairs(model, bench.docs, bench.pairs, threshold);

  Rng shuffle_rng = Rng(shuffle_seed).derive(0x7368);
  Corpus shuffled;
  shuffled.reserve(bench.docs.size());
  for (const Document& d : bench.docs) shuffled.push_back(perturb_sections(d, shuffle_rng));
  out.shuffled = evaluate_pairs(model, shuffled, bench.pairs, threshold);
  return out;
}

std::vector<LengthRow> run_length_sweep(const TrainConfig& base, const RawCorpus& corpus,
                                        const std::vector<int>& limits) {
  std::vector<LengthRow> rows;
  for (int limit : limits) {
    TrainConfig cfg = base;
    cfg.max_section_tokens = limit;
    TrainResult r = train(cfg, corpus);
    rows.push_back({limit, r.test});
  }
  return rows;
}

std::vector<BatchCurve> run_batchsize_sweep(const TrainConfig& base, const RawCorpus& corpus,
                                            const std::vector<int>& sizes) {
  std::vector<BatchCurve> curves;
  for (int n : sizes) {
    TrainConfig cfg = base;
    cfg.batch_size = n;
    TrainResult r = train(cfg, corpus);
    BatchCurve c;
    c.batch_size = n;
    for (const EpochLog& e : r.log) c.val_accuracy.push_back(e.val_accuracy);
    curves.push_back(std::move(c));
  }
  return curves;
}

// --- serialization -----------------------------------------------------------

std::string epoch_log_to_jsonl(const std::vector<EpochLog>& log) {
  std::string out;
  for (const EpochLog& e : log) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["val_accuracy"] = e.val_accuracy;
    j["wall_ms"] = e.wall_ms;
    out += j.dump();
    out += "\n";
  }
  return out;
}

std::string eval_result_to_json(const EvalResult& r) {
  nlohmann::json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["accuracy"] = r.accuracy;
  j["threshold"] = r.threshold;
  j["pairs"] = {{"total", r.total}, {"positive", r.positives}, {"negative", r.negatives}};
  j["confusion"] = {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
  return j.dump();
}

}  // namespace coldoc
