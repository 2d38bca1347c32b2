#include <benchmark/benchmark.h>

#include "coldoc/corpus.hpp"
#include "coldoc/encoder.hpp"
#include "coldoc/loss.hpp"
#include "coldoc/model.hpp"
#include "coldoc/rng.hpp"
#include "coldoc/tensor.hpp"

using namespace coldoc;

namespace {

Model bench_model() {
  TrainConfig cfg;
  cfg.seed = 9;
  std::vector<std::string> words;
  for (int i = 0; i < 200; ++i) words.push_back("w" + std::to_string(i));
  return build_model(cfg, Vocabulary::from_tokens(words));
}

Chunk bench_chunk(std::size_t chunk_len, Rng& rng) {
  Chunk c;
  c.chunk_id = 0;
  c.token_ids.resize(chunk_len);
  c.pad_mask.assign(chunk_len, true);
  for (auto& id : c.token_ids) id = 2 + rng.index(198);
  return c;
}

}  // namespace

static void BM_matmul(benchmark::State& state) {
  std::size_t n = std::size_t(state.range(0));
  Rng rng(1);
  Tensor a = Tensor::randn({n, n}, rng, 1.0);
  Tensor b = Tensor::randn({n, n}, rng, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
}
BENCHMARK(BM_matmul)->Arg(32)->Arg(64);

static void BM_encode_chunk(benchmark::State& state) {
  Model m = bench_model();
  Rng rng(2);
  Chunk c = bench_chunk(std::size_t(m.config.chunk_len), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_chunk(embed_chunk(c, 0, m.tables), m.encoder));
  }
}
BENCHMARK(BM_encode_chunk);

static void BM_encode_chunk_backward(benchmark::State& state) {
  Model m = bench_model();
  Rng rng(2);
  Chunk c = bench_chunk(std::size_t(m.config.chunk_len), rng);
  for (auto _ : state) {
    Tensor loss = sum_all(encode_chunk(embed_chunk(c, 0, m.tables), m.encoder));
    loss.backward();
    m.params.zero_grad();
  }
}
BENCHMARK(BM_encode_chunk_backward);

static void BM_supcon_loss(benchmark::State& state) {
  std::size_t rows = std::size_t(state.range(0));
  Rng rng(3);
  LossBatch batch;
  batch.tau = 0.5;
  for (std::size_t i = 0; i < rows; ++i) {
    batch.z.push_back(l2_normalize(Tensor::randn({16}, rng, 1.0)));
    batch.labels.push_back(int(i / 2));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(supcon_loss(batch));
  }
}
BENCHMARK(BM_supcon_loss)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
