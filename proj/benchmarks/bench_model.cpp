#include <benchmark/benchmark.h>

#include "spiro/model.hpp"
#include "spiro/training.hpp"

namespace {

spiro::Sequences random_batch(spiro::Rng& rng, int batch, const spiro::TransformerConfig& c) {
  spiro::Sequences out(static_cast<std::size_t>(batch));
  for (auto& s : out) {
    for (int t = 0; t < c.max_seq_len; ++t) {
      s.push_back(static_cast<int>(
          spiro::uniform_index(rng, static_cast<std::uint64_t>(c.vocab_size))));
    }
  }
  return out;
}

// Default model on a batch of state.range(0) full-length sequences.
void BM_ForwardEval(benchmark::State& state) {
  const spiro::TransformerConfig c;
  spiro::Rng rng(1);
  const auto params = spiro::ModelParams::init(c, rng);
  const auto batch = random_batch(rng, static_cast<int>(state.range(0)), c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spiro::forward_logits(params, c, batch));
  }
}
BENCHMARK(BM_ForwardEval)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const spiro::TransformerConfig c;
  spiro::Rng rng(2);
  auto params = spiro::ModelParams::init(c, rng);
  auto opt = spiro::OptimizerState::for_params(params);
  const auto batch = random_batch(rng, static_cast<int>(state.range(0)), c);
  const auto targets = spiro::next_token_targets(batch);
  for (auto _ : state) {
    const auto trace = spiro::forward(params, c, batch, spiro::Mode::kTrain, &rng);
    const auto loss = spiro::next_token_loss(trace.logits, targets);
    spiro::backward(trace, params, loss.dlogits);
    spiro::optimizer_step(params, opt, spiro::AdamConfig{});
  }
}
BENCHMARK(BM_TrainStep)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
