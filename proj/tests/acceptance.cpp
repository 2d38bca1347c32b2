// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coldoc/checkpoint.hpp"
#include "coldoc/corpus.hpp"
#include "coldoc/encoder.hpp"
#include "coldoc/io.hpp"
#include "coldoc/loss.hpp"
#include "coldoc/model.hpp"
#include "coldoc/rng.hpp"
#include "coldoc/similarity.hpp"
#include "coldoc/synth.hpp"
#include "coldoc/tensor.hpp"
#include "coldoc/train.hpp"
#include "gradcheck.hpp"
#include "json.hpp"

using namespace coldoc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  using namespace std::chrono;
  return duration_cast<duration<double>>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double v, int prec = 3) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

// --- shared fixtures ----------------------------------------------------------

/// The separability fixture: 4 classes x 40 documents, 2 sections of
/// 2 x 32-token chunks, vocabulary 200, topic sharpness 0.7.
SynthConfig fixture_synth() {
  SynthConfig s;
  s.n_classes = 4;
  s.docs_per_class = 40;
  s.vocab_size = 200;
  s.sections_per_doc = 2;
  s.chunks_per_section = 2;
  s.chunk_len = 32;
  s.topic_sharpness = 0.7;
  s.seed = 7;
  return s;
}

TrainConfig fixture_train(std::uint64_t seed, Variant variant = Variant::full) {
  TrainConfig cfg;  // toy dims are the defaults
  cfg.variant = variant;
  cfg.epochs = 30;
  cfg.seed = seed;
  return cfg;
}

/// Routes a chunk vector through the aggregator so the projection sees its
/// expected width (AC-1 composite 2).
Tensor pad_to_proj(const Tensor& chunk_vec, const Model& m) {
  return aggregate_section({chunk_vec}, m.encoder);
}

struct TrainedRun {
  TrainResult result;
  double wall_s = 0.0;
};

/// All fixture trainings the criteria share, run as independent parallel
/// jobs (each owns its model, graph, and random streams).
class RunCache {
 public:
  explicit RunCache(const RawCorpus& corpus) : corpus_(corpus) {}

  const TrainedRun& get(Variant v, std::uint64_t seed) {
    auto key = std::make_pair(v, seed);
    auto it = runs_.find(key);
    if (it == runs_.end()) {
      throw std::logic_error("acceptance: run not prefetched");
    }
    return it->second;
  }

  void prefetch(const std::vector<std::pair<Variant, std::uint64_t>>& jobs) {
    std::vector<std::future<TrainedRun>> futures;
    for (auto [v, seed] : jobs) {
      futures.push_back(std::async(std::launch::async, [this, v = v, seed = seed]() {
        double t0 = now_s();
        TrainedRun run{train(fixture_train(seed, v), corpus_), 0.0};
        run.wall_s = now_s() - t0;
        return run;
      }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      runs_.emplace(jobs[i], futures[i].get());
    }
  }

 private:
  const RawCorpus& corpus_;
  std::map<std::pair<Variant, std::uint64_t>, TrainedRun> runs_;
};

// --- criteria -------------------------------------------------------------

Outcome ac1_gradient_suite() {
  Rng rng(101);
  Rng wrng(102);
  double worst_nonlinear = 0.0, worst_linear = 0.0;
  std::size_t checked = 0;
  auto track = [&](gradcheck::Report rep, bool linear) {
    (linear ? worst_linear : worst_nonlinear) =
        std::max(linear ? worst_linear : worst_nonlinear, rep.max_rel_err);
    checked += rep.checked;
  };
  auto readout = [&](std::vector<std::size_t> shape) {
    return Tensor::randn(std::move(shape), wrng, 1.0);
  };

  {  // linear ops
    Tensor a = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor b = Tensor::randn({4, 3}, rng, 1.0, true);
    Tensor w = readout({3, 3});
    track(gradcheck::check([&]() { return sum_all(mul(matmul(a, b), w)); }, {a, b}), true);

    Tensor c = Tensor::randn({2, 5}, rng, 1.0, true);
    Tensor d = Tensor::randn({1, 5}, rng, 1.0, true);
    Tensor w2 = readout({2, 5});
    track(gradcheck::check([&]() { return sum_all(mul(add(c, d), w2)); }, {c, d}), true);
    track(gradcheck::check([&]() { return sum_all(sub(c, scale(c, 0.3))); }, {c}), true);
    Tensor w3 = readout({5, 2});
    track(gradcheck::check([&]() { return sum_all(mul(transpose(c), w3)); }, {c}), true);
    Tensor w4 = readout({10});
    track(gradcheck::check([&]() { return sum_all(mul(reshape(c, {10}), w4)); }, {c}), true);
    Tensor w5 = readout({2, 3});
    track(gradcheck::check(
              [&]() { return sum_all(mul(slice(c, 1, 1, 3), w5)); }, {c}),
          true);
    Tensor e = Tensor::randn({2, 5}, rng, 1.0, true);
    Tensor w6 = readout({4, 5});
    track(gradcheck::check([&]() { return sum_all(mul(concat({c, e}, 0), w6)); }, {c, e}),
          true);
    Tensor w7 = readout({5});
    track(gradcheck::check([&]() { return sum_all(mul(sum(c, 0), w7)); }, {c}), true);
    Tensor w8 = readout({2});
    track(gradcheck::check([&]() { return sum_all(mul(mean(c, 1), w8)); }, {c}), true);
    track(gradcheck::check([&]() { return mean_all(c); }, {c}), true);
    Tensor table = Tensor::randn({6, 3}, rng, 1.0, true);
    Tensor w9 = readout({4, 3});
    track(gradcheck::check(
              [&]() {
                return sum_all(mul(gather_rows(table, {5, 0, 0, 3}), w9));
              },
              {table}),
          true);
  }
  {  // nonlinear ops
    Tensor x = Tensor::randn({3, 4}, rng, 1.5, true);
    Tensor w = readout({3, 4});
    track(gradcheck::check([&]() { return sum_all(mul(softmax(x, 1), w)); }, {x}), false);
    track(gradcheck::check([&]() { return sum_all(mul(tanh(x), w)); }, {x}), false);
    track(gradcheck::check([&]() { return sum_all(mul(sigmoid(x), w)); }, {x}), false);
    track(gradcheck::check([&]() { return sum_all(mul(l2_normalize(x), w)); }, {x}), false);
    Tensor pos = Tensor::from_data({4}, {0.4, 1.1, 2.2, 0.7}, true);
    track(gradcheck::check([&]() { return sum_all(log(pos)); }, {pos}), false);
    track(gradcheck::check([&]() { return sum_all(exp(scale(x, 0.5))); }, {x}), false);
    track(gradcheck::check([&]() { return sum_all(mul(mul(x, sigmoid(x)), w)); }, {x}),
          false);
  }

  // composite 1: matmul -> tanh -> mean
  {
    Tensor a = Tensor::randn({3, 4}, rng, 0.8, true);
    Tensor b = Tensor::randn({4, 2}, rng, 0.8, true);
    track(gradcheck::check([&]() { return mean_all(tanh(matmul(a, b))); }, {a, b}), false);
  }

  // composites 2 and 3: encoder pipeline and contrastive objective
  TrainConfig toy;
  toy.d_model = 8;
  toy.layers = 1;
  toy.enc_heads = 2;
  toy.d_ff = 8;
  toy.cw_heads = 2;
  toy.cw_head_dim = 4;
  toy.d_lstm = 6;
  toy.d_proj = 4;
  toy.chunk_len = 4;
  toy.max_chunks = 8;
  toy.max_sections = 4;
  toy.seed = 31;
  std::vector<std::string> words;
  for (int i = 0; i < 10; ++i) words.push_back("w" + std::to_string(i));
  Model m = build_model(toy, Vocabulary::from_tokens(words));
  // zero-initialized residual branches hide their gradients from a finite
  // difference at the origin, so perturb them off zero first
  Rng jitter(103);
  for (const auto& [name, t] : m.params.items()) {
    Tensor handle = t;  // shared handle; mutation reaches the model
    for (double& v : handle.raw_data()) {
      if (v == 0.0) v = jitter.normal() * 0.05;
    }
  }

  auto mk_section = [&](std::vector<std::vector<std::size_t>> chunk_ids, std::size_t p) {
    Section s;
    s.section_id = p;
    for (std::size_t q = 0; q < chunk_ids.size(); ++q) {
      Chunk c;
      c.chunk_id = q;
      for (std::size_t id : chunk_ids[q]) {
        c.token_ids.push_back(id);
        c.pad_mask.push_back(true);
      }
      while (c.token_ids.size() < 4) {
        c.token_ids.push_back(Vocabulary::kPad);
        c.pad_mask.push_back(false);
      }
      s.chunks.push_back(std::move(c));
    }
    return s;
  };
  Section s0 = mk_section({{2, 3, 4}, {5, 6}}, 0);
  Section s1 = mk_section({{7, 8}, {9, 2, 3}}, 1);
  EncodeOptions opts;

  {  // composite 2: embed -> transformer chunk -> project readout
    Tensor w = readout({4});
    track(gradcheck::check(
              [&]() {
                Tensor rep = encode_chunk(embed_chunk(s0.chunks[0], 0, m.tables), m.encoder);
                return sum_all(mul(project(pad_to_proj(rep, m), m.encoder, true), w));
              },
              {m.tables.word, m.encoder.layers[0].wq, m.encoder.proj_w}),
          false);
  }

  {  // composite 3: two attended sections through the contrastive loss
    track(gradcheck::check(
              [&]() {
                Document doc;
                doc.id = "g";
                doc.sections = {s0, s1};
                DocumentEncoding enc =
                    encode_document_sections(doc, m.tables, m.encoder, opts);
                LossBatch lb;
                lb.tau = 0.5;
                lb.z = {enc.sections[0].z, enc.sections[1].z, enc.sections[0].z,
                        enc.sections[1].z};
                lb.labels = {0, 0, 1, 1};
                return supcon_loss(lb);
              },
              {m.tables.section_id, m.encoder.cw_wq, m.encoder.fwd_wx, m.encoder.proj_w}),
          false);
  }

  bool pass = worst_linear <= 1e-6 && worst_nonlinear <= 1e-4;
  return {pass, "max rel err " + fmt(worst_linear, 9) + " (linear), " +
                    fmt(worst_nonlinear, 9) + " (nonlinear) over " + std::to_string(checked) +
                    " partials"};
}

Outcome ac2_loss_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  const double taus[] = {0.1, 0.5, 2.0};
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t pairs = 2 + rng.index(7);  // 2N between 4 and 16
    std::size_t d = 2 + rng.index(7);      // d_proj <= 8
    std::vector<std::vector<double>> z;
    std::vector<int> labels;
    for (std::size_t p = 0; p < pairs; ++p) {
      for (int k = 0; k < 2; ++k) {
        std::vector<double> row(d);
        for (double& v : row) v = rng.normal();
        z.push_back(std::move(row));
        labels.push_back(int(p % 3));
      }
    }
    LossBatch batch;
    for (const auto& row : z) batch.z.push_back(Tensor::row(row));
    batch.labels = labels;
    for (double tau : taus) {
      batch.tau = tau;
      worst = std::max(worst,
                       std::fabs(supcon_loss(batch).value() - supcon_loss_oracle(z, labels, tau)));
    }
  }
  return {worst <= 1e-9,
          "max |vectorized - naive| = " + fmt(worst, 12) + " over 300 evaluations"};
}

Outcome ac3_special_case() {
  // hand values computed independently before the implementation
  const std::vector<std::vector<double>> zA = {{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const std::vector<std::vector<double>> zB = {{1, 0}, {0.6, 0.8}, {0, 1}, {-0.6, 0.8}};
  const std::vector<int> labels = {1, 1, 0, 0};
  const double expectA = 0.958179064887538;  // 4 ln(1 + 2 e^-2)
  const double expectB = 2.5715717285995927;

  auto eval = [&](const std::vector<std::vector<double>>& z) {
    LossBatch b;
    b.tau = 0.5;
    b.labels = labels;
    for (const auto& r : z) b.z.push_back(Tensor::row(r));
    return supcon_loss(b).value();
  };
  double errA = std::fabs(eval(zA) - expectA);
  double errB = std::fabs(eval(zB) - expectB);
  double errOracleA = std::fabs(supcon_loss_oracle(zA, labels, 0.5) - expectA);
  bool pass = errA <= 1e-9 && errB <= 1e-9 && errOracleA <= 1e-9;
  return {pass, "batch-of-two errors " + fmt(errA, 12) + " / " + fmt(errB, 12)};
}

Outcome ac4_attention_invariants() {
  TrainConfig toy;
  toy.d_model = 8;
  toy.layers = 0;
  toy.enc_heads = 2;
  toy.cw_heads = 2;
  toy.cw_head_dim = 4;
  toy.chunk_len = 4;
  toy.seed = 5;
  std::vector<std::string> words{"a", "b", "c"};
  Model m = build_model(toy, Vocabulary::from_tokens(words));
  Rng rng(44);
  // ensure the projections are non-trivial
  for (Tensor t : {m.encoder.cw_wq, m.encoder.cw_wk, m.encoder.cw_wv}) {
    for (double& v : t.raw_data()) v = rng.normal() * 0.5;
  }

  double worst_row = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tensor> q, kv;
    for (int i = 0; i < 3; ++i) q.push_back(Tensor::randn({8}, rng, 2.0));
    for (int i = 0; i < 4; ++i) kv.push_back(Tensor::randn({8}, rng, 2.0));
    ChunkwiseResult res = chunkwise_attention(q, kv, m.encoder);
    for (std::size_t h = 0; h < res.record.heads; ++h) {
      for (std::size_t i = 0; i < res.record.n_query; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < res.record.n_key; ++k) s += res.record.at(h, i, k);
        worst_row = std::max(worst_row, std::fabs(s - 1.0));
      }
    }
  }

  std::vector<Tensor> q1 = {Tensor::randn({8}, rng, 1.0)};
  std::vector<Tensor> kv1 = {Tensor::randn({8}, rng, 1.0)};
  ChunkwiseResult single = chunkwise_attention(q1, kv1, m.encoder);
  bool single_exact = true;
  for (std::size_t h = 0; h < single.record.heads; ++h) {
    single_exact = single_exact && single.record.at(h, 0, 0) == 1.0;
  }

  for (Tensor t : {m.encoder.cw_wq, m.encoder.cw_wk}) {
    for (double& v : t.raw_data()) v = 0.0;
  }
  std::vector<Tensor> kv5;
  for (int i = 0; i < 5; ++i) kv5.push_back(Tensor::randn({8}, rng, 1.0));
  ChunkwiseResult uniform = chunkwise_attention(q1, kv5, m.encoder);
  double worst_uniform = 0.0;
  for (std::size_t h = 0; h < uniform.record.heads; ++h) {
    for (std::size_t k = 0; k < 5; ++k) {
      worst_uniform = std::max(worst_uniform, std::fabs(uniform.record.at(h, 0, k) - 0.2));
    }
  }

  bool pass = worst_row <= 1e-6 && single_exact && worst_uniform <= 1e-12;
  return {pass, "row-sum err " + fmt(worst_row, 9) + ", single-key exact " +
                    (single_exact ? "yes" : "NO") + ", uniform err " + fmt(worst_uniform, 12)};
}

Outcome ac5_separability(RunCache& cache) {
  std::ostringstream detail;
  int passed = 0;
  bool time_ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    const TrainedRun& run = cache.get(Variant::full, seed);
    double acc = run.result.test.accuracy;
    if (acc >= 0.90) ++passed;
    if (run.wall_s >= 600.0) time_ok = false;
    detail << "seed " << seed << ": acc " << fmt(acc) << " (" << fmt(run.wall_s, 1) << " s)  ";
  }
  return {passed >= 2 && time_ok, detail.str() + "-> " + std::to_string(passed) + "/3 >= 0.90"};
}

Outcome ac6_ablation_ordering(RunCache& cache) {
  std::map<Variant, double> mean_acc;
  std::ostringstream detail;
  for (Variant v : {Variant::full, Variant::no_aug, Variant::no_lstm, Variant::no_cl}) {
    double total = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      total += cache.get(v, seed).result.test.accuracy;
    }
    mean_acc[v] = total / 3.0;
    detail << variant_name(v) << " " << fmt(mean_acc[v]) << "  ";
  }
  double gap = mean_acc[Variant::full] - mean_acc[Variant::no_cl];
  bool pass = gap >= 0.05 && mean_acc[Variant::full] >= mean_acc[Variant::no_aug];
  return {pass, detail.str() + "(shared-seed means; full - no-cl = " + fmt(gap) + ")"};
}

Outcome ac7_perturbation(RunCache& cache, const RawCorpus& corpus) {
  const TrainedRun& full_run = cache.get(Variant::full, 1);
  const TrainedRun& ctrl_run = cache.get(Variant::no_aug, 1);

  auto mean_delta = [&](const Model& model, double threshold) {
    double clean = 0.0, shuffled = 0.0;
    int draws = 0;
    for (std::uint64_t shuffle_seed : {201, 202, 203, 204, 205}) {
      PerturbResult p = run_perturbation(model, threshold, corpus, 2, shuffle_seed);
      clean = p.clean.accuracy;
      shuffled += p.shuffled.accuracy;
      ++draws;
    }
    shuffled /= draws;
    return std::make_pair(clean, clean - shuffled);
  };
  auto [full_clean, full_delta] = mean_delta(full_run.result.model, full_run.result.threshold);
  auto [ctrl_clean, ctrl_delta] = mean_delta(ctrl_run.result.model, ctrl_run.result.threshold);

  bool pass = std::fabs(full_delta) <= 0.02 && ctrl_delta > full_delta;
  return {pass, "full clean " + fmt(full_clean) + " delta " + fmt(full_delta) + "; control clean " +
                    fmt(ctrl_clean) + " delta " + fmt(ctrl_delta) +
                    " (5 shuffle draws, degradation = clean - shuffled)"};
}

Outcome ac8_null_signal() {
  SynthConfig s = fixture_synth();
  s.topic_sharpness = 0.0;
  RawCorpus corpus = synth_generate(s);
  TrainResult r = train(fixture_train(1), corpus);
  double acc = r.test.accuracy;
  return {acc >= 0.45 && acc <= 0.55, "null-corpus accuracy " + fmt(acc) + " (want 0.5 +- 0.05)"};
}

Outcome ac9_interpretability(RunCache& cache, const RawCorpus& corpus) {
  const Model& model = cache.get(Variant::full, 1).result.model;
  TestBench bench = make_test_bench(model, corpus, 2);

  // pick a same-class pair and a cross-class partner from the held-out docs
  const Document* same_a = nullptr;
  const Document* same_b = nullptr;
  const Document* cross = nullptr;
  for (std::size_t i = 0; i < bench.docs.size() && !same_a; ++i) {
    for (std::size_t j = i + 1; j < bench.docs.size(); ++j) {
      if (bench.docs[i].label == bench.docs[j].label) {
        same_a = &bench.docs[i];
        same_b = &bench.docs[j];
        break;
      }
    }
  }
  if (same_a) {
    for (const Document& d : bench.docs) {
      if (d.label != same_a->label) {
        cross = &d;
        break;
      }
    }
  }
  if (!same_a || !cross) return {false, "fixture test split lacks a same/cross triple"};

  SimilarityReport same_rep = compare_documents(*same_a, *same_b, model);
  SimilarityReport cross_rep = compare_documents(*same_a, *cross, model);

  // within-document section scores vs cross-document mean
  double within = 0.0, across = 0.0;
  std::size_t nw = 0, na = 0;
  std::size_t n = same_rep.section_matrix.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (same_rep.section_owner[i] == same_rep.section_owner[j]) {
        within += same_rep.section_matrix[i][j];
        ++nw;
      } else {
        across += same_rep.section_matrix[i][j];
        ++na;
      }
    }
  }
  within /= double(nw);
  across /= double(na);

  auto dir = std::filesystem::temp_directory_path() / "coldoc_acceptance_report";
  std::filesystem::remove_all(dir);
  auto written = write_report(same_rep, dir.string());
  std::size_t svgs = 0;
  bool json_ok = false;
  for (const std::string& p : written) {
    if (p.ends_with(".svg") && std::filesystem::exists(p)) ++svgs;
    if (p.ends_with("report.json")) {
      auto j = nlohmann::json::parse(read_file(p));
      json_ok = j.contains("doc_score") && j.contains("section_matrix") &&
                j.contains("chunk_matrix") && j.contains("attention_overlay") &&
                j.contains("labels") && j.contains("ids");
    }
  }

  bool pass = same_rep.doc_score > cross_rep.doc_score && within > across && svgs == 3 &&
              json_ok;
  return {pass, "doc_score same " + fmt(same_rep.doc_score) + " vs cross " +
                    fmt(cross_rep.doc_score) + "; sections within " + fmt(within) +
                    " vs across-mean " + fmt(across) + "; " + std::to_string(svgs) +
                    " SVGs, JSON " + (json_ok ? "valid" : "INVALID")};
}

Outcome ac10_determinism() {
  SynthConfig s;
  s.n_classes = 2;
  s.docs_per_class = 20;
  s.vocab_size = 60;
  s.sections_per_doc = 2;
  s.chunks_per_section = 1;
  s.chunk_len = 8;
  s.topic_sharpness = 0.9;
  s.seed = 13;

  // corpus generation determinism
  auto dir = std::filesystem::temp_directory_path() / "coldoc_acceptance_det";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::string c1 = (dir / "c1.jsonl").string();
  std::string c2 = (dir / "c2.jsonl").string();
  save_corpus_jsonl(synth_generate(s), c1);
  save_corpus_jsonl(synth_generate(s), c2);
  bool corpus_ok = read_file(c1) == read_file(c2);

  // training determinism
  RawCorpus corpus = load_corpus_jsonl(c1);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.chunk_len = 8;
  cfg.d_model = 8;
  cfg.layers = 1;
  cfg.enc_heads = 2;
  cfg.d_ff = 8;
  cfg.cw_heads = 2;
  cfg.cw_head_dim = 4;
  cfg.d_lstm = 6;
  cfg.d_proj = 4;
  cfg.epochs = 3;
  cfg.seed = 11;
  cfg.pairs_per_doc = 2;
  TrainResult r1 = train(cfg, corpus);
  TrainResult r2 = train(cfg, corpus);
  std::string p1 = (dir / "a.bin").string();
  std::string p2 = (dir / "b.bin").string();
  save_checkpoint(r1.model, r1.threshold, p1);
  save_checkpoint(r2.model, r2.threshold, p2);
  bool train_ok = read_file(p1) == read_file(p2);

  // checkpoint round-trip
  LoadedCheckpoint loaded = load_checkpoint(p1);
  std::string p3 = (dir / "c.bin").string();
  save_checkpoint(loaded.model, loaded.threshold, p3);
  bool roundtrip_ok = read_file(p1) == read_file(p3);

  std::filesystem::remove_all(dir);
  bool pass = corpus_ok && train_ok && roundtrip_ok;
  return {pass, std::string("corpus ") + (corpus_ok ? "ok" : "DIFFERS") + ", checkpoint " +
                    (train_ok ? "ok" : "DIFFERS") + ", save/load/save " +
                    (roundtrip_ok ? "ok" : "DIFFERS")};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  double t_start = now_s();

  RawCorpus fixture = synth_generate(fixture_synth());
  RunCache cache(fixture);
  {
    std::vector<std::pair<Variant, std::uint64_t>> jobs;
    for (Variant v : {Variant::full, Variant::no_aug, Variant::no_lstm, Variant::no_cl}) {
      for (std::uint64_t seed : {1, 2, 3}) jobs.emplace_back(v, seed);
    }
    std::printf("training %zu fixture jobs (parallel)...\n", jobs.size());
    cache.prefetch(jobs);
  }

  struct Criterion {
    const char* id;
    const char* desc;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {"AC-1", "gradient suite vs central finite differences",
       [&]() { return ac1_gradient_suite(); }},
      {"AC-2", "contrastive loss matches the naive oracle", [&]() { return ac2_loss_oracle(); }},
      {"AC-3", "batch-of-two special case reproduces the hand value",
       [&]() { return ac3_special_case(); }},
      {"AC-4", "chunkwise attention invariants", [&]() { return ac4_attention_invariants(); }},
      {"AC-5", "synthetic separability at toy scale", [&]() { return ac5_separability(cache); }},
      {"AC-6", "ablation ordering", [&]() { return ac6_ablation_ordering(cache); }},
      {"AC-7", "section-shuffle robustness", [&]() { return ac7_perturbation(cache, fixture); }},
      {"AC-8", "null-signal control", [&]() { return ac8_null_signal(); }},
      {"AC-9", "three-level interpretability report",
       [&]() { return ac9_interpretability(cache, fixture); }},
      {"AC-10", "determinism and byte-exact round-trips", [&]() { return ac10_determinism(); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    double t0 = now_s();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%-6s %s  %s: %s (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.desc,
                out.detail.c_str(), now_s() - t0);
    std::fflush(stdout);
  }

  std::printf("%d/10 criteria passed (total %.1f s)\n", 10 - failures, now_s() - t_start);
  return failures == 0 ? 0 : 1;
}
