#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "spiro/errors.hpp"
#include "spiro/model.hpp"
#include "spiro/training.hpp"

namespace spiro {
namespace {

TransformerConfig tiny_config(double dropout = 0.0) {
  TransformerConfig c;
  c.num_layers = 1;
  c.num_heads = 1;
  c.d_model = 8;
  c.d_ff = 16;
  c.vocab_size = 16;
  c.max_seq_len = 3;
  c.dropout_rate = dropout;
  return c;
}

Sequences random_batch(Rng& rng, int batch, int len, int vocab) {
  Sequences out(static_cast<std::size_t>(batch));
  for (auto& s : out) {
    for (int i = 0; i < len; ++i) {
      s.push_back(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(vocab))));
    }
  }
  return out;
}

double batch_loss(const ModelParams& p, const TransformerConfig& c,
                  const Sequences& batch, Mode mode, const Rng& rng_start) {
  Rng rng = rng_start;
  const ForwardTrace t = forward(p, c, batch, mode, &rng);
  return next_token_loss(t.logits, next_token_targets(batch)).loss;
}

TEST(PositionalEncoding, PositionZero) {
  const auto pe = positional_encoding(0, 64);
  ASSERT_EQ(pe.size(), 64u);
  for (std::size_t i = 0; i < pe.size(); ++i) {
    EXPECT_EQ(pe[i], i % 2 == 0 ? 0.0 : 1.0) << i;
  }
}

TEST(PositionalEncoding, BoundedAndDistinct) {
  std::set<std::vector<double>> seen;
  for (int pos = 0; pos < 100; ++pos) {
    const auto pe = positional_encoding(pos, 64);
    for (double v : pe) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_TRUE(seen.insert(pe).second) << pos;
  }
}

TEST(PositionalEncoding, ClosedForm) {
  const auto pe = positional_encoding(7, 16);
  for (int k = 0; k < 8; ++k) {
    const double freq = std::pow(10000.0, -2.0 * k / 16.0);
    EXPECT_NEAR(pe[2 * k], std::sin(7 * freq), 1e-14);
    EXPECT_NEAR(pe[2 * k + 1], std::cos(7 * freq), 1e-14);
  }
}

TEST(CausalMask, Counts) {
  for (int t : {1, 2, 5, 100}) {
    const MaskMatrix m = causal_mask(t);
    int masked = 0;
    for (int i = 0; i < t; ++i) {
      int open = 0;
      for (int j = 0; j < t; ++j) {
        EXPECT_EQ(m(i, j), j > i);
        open += m(i, j) ? 0 : 1;
        masked += m(i, j) ? 1 : 0;
      }
      EXPECT_EQ(open, i + 1);
    }
    EXPECT_EQ(masked, t * (t - 1) / 2);
  }
}

TEST(Config, Validation) {
  TransformerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.d_model = 63;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TransformerConfig{};
  c.num_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TransformerConfig{};
  c.dropout_rate = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TransformerConfig{};
  c.num_layers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Params, ShapesAndInit) {
  const TransformerConfig c;
  Rng rng(1);
  ModelParams p = ModelParams::init(c, rng);
  EXPECT_NO_THROW(p.check_shapes(c));
  EXPECT_TRUE(p.all_finite());
  EXPECT_EQ(p.embedding.value.rows(), 256);
  EXPECT_EQ(p.w_out.value.cols(), 256);
  // canonical tensor names are unique
  std::set<std::string> names;
  for (const auto* t : p.tensors()) EXPECT_TRUE(names.insert(t->name).second) << t->name;
  const double bound = 1.0 / std::sqrt(64.0);
  EXPECT_LE(p.layers[0].w_q.value.cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(p.layers[0].ln1_gain.value.minCoeff(), 1.0);
  EXPECT_EQ(p.b_out.value.cwiseAbs().maxCoeff(), 0.0);

  TransformerConfig other = c;
  other.d_ff = 64;
  EXPECT_THROW(p.check_shapes(other), ConfigError);
}

TEST(Forward, ShapesAndSoftmaxRows) {
  const TransformerConfig c;
  Rng rng(3);
  const ModelParams p = ModelParams::init(c, rng);
  const Sequences batch = random_batch(rng, 3, 20, 256);
  const ForwardTrace t = forward(p, c, batch, Mode::kEval, nullptr);
  EXPECT_EQ(t.logits.rows(), 60);
  EXPECT_EQ(t.logits.cols(), 256);
  for (const auto& layer : t.layers) {
    ASSERT_EQ(layer.probs.size(), 12u);
    for (const Matrix& pr : layer.probs) {
      for (Eigen::Index i = 0; i < pr.rows(); ++i) {
        EXPECT_NEAR(pr.row(i).sum(), 1.0, 1e-12);
        for (Eigen::Index j = i + 1; j < pr.cols(); ++j) EXPECT_EQ(pr(i, j), 0.0);
      }
    }
  }
}

TEST(Forward, RejectsBadBatches) {
  const TransformerConfig c = tiny_config();
  Rng rng(3);
  const ModelParams p = ModelParams::init(c, rng);
  EXPECT_THROW(forward(p, c, Sequences{{1, 2, 3, 4}}, Mode::kEval, nullptr),
               ConfigError);
  EXPECT_THROW(forward(p, c, Sequences{{1, 2}, {1}}, Mode::kEval, nullptr),
               ConfigError);
  EXPECT_THROW(forward(p, c, Sequences{{1, 16}}, Mode::kEval, nullptr),
               ConfigError);
  EXPECT_THROW(forward(p, c, Sequences{}, Mode::kEval, nullptr), ConfigError);
  const TransformerConfig d = tiny_config(0.5);
  const ModelParams q = ModelParams::init(d, rng);
  EXPECT_THROW(forward(q, d, Sequences{{1, 2}}, Mode::kTrain, nullptr),
               ConfigError);
}

TEST(Forward, ZeroDropoutTrainEqualsEval) {
  const TransformerConfig c = [] {
    TransformerConfig k;
    k.dropout_rate = 0.0;
    return k;
  }();
  Rng rng(5);
  const ModelParams p = ModelParams::init(c, rng);
  const Sequences batch = random_batch(rng, 2, 30, 256);
  Rng r2(9);
  const Matrix train = forward(p, c, batch, Mode::kTrain, &r2).logits;
  const Matrix eval = forward(p, c, batch, Mode::kEval, nullptr).logits;
  EXPECT_EQ(train, eval);
}

TEST(Forward, DropoutIsSeededAndActive) {
  const TransformerConfig c;
  Rng rng(5);
  const ModelParams p = ModelParams::init(c, rng);
  const Sequences batch = random_batch(rng, 2, 30, 256);
  Rng a(11), b(11), d(12);
  const ForwardTrace ta = forward(p, c, batch, Mode::kTrain, &a);
  const ForwardTrace tb = forward(p, c, batch, Mode::kTrain, &b);
  const ForwardTrace td = forward(p, c, batch, Mode::kTrain, &d);
  EXPECT_EQ(ta.logits, tb.logits);
  EXPECT_EQ(a, b);
  EXPECT_NE(ta.logits, td.logits);
  const Matrix eval = forward_logits(p, c, batch);
  EXPECT_NE(ta.logits, eval);

  const ForwardTrace again = replay(ta, p);
  EXPECT_EQ(again.logits, ta.logits);
}

TEST(Forward, Causality) {
  for (double dropout : {0.0, 0.2}) {
    TransformerConfig c;
    c.dropout_rate = dropout;
    Rng rng(21);
    const ModelParams p = ModelParams::init(c, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Sequences batch = random_batch(rng, 1, 100, 256);
      const int k = static_cast<int>(uniform_index(rng, 100));
      Sequences changed = batch;
      changed[0][static_cast<std::size_t>(k)] =
          (changed[0][static_cast<std::size_t>(k)] + 1 +
           static_cast<int>(uniform_index(rng, 254))) % 256;
      const Mode mode = dropout > 0 ? Mode::kTrain : Mode::kEval;
      Rng r1(77), r2(77);
      const Matrix a = forward(p, c, batch, mode, &r1).logits;
      const Matrix b = forward(p, c, changed, mode, &r2).logits;
      for (int i = 0; i < k; ++i) {
        EXPECT_EQ(a.row(i), b.row(i)) << "position " << i << " edit at " << k;
      }
      if (k < 99) EXPECT_NE(a.row(k), b.row(k));
    }
  }
}

TEST(Forward, LargeActivationsStayFinite) {
  const TransformerConfig c;
  Rng rng(8);
  ModelParams p = ModelParams::init(c, rng);
  p.embedding.value *= 1e4;
  for (auto& L : p.layers) {
    L.w_q.value *= 100.0;
    L.w_k.value *= 100.0;
  }
  const Sequences batch = random_batch(rng, 2, 100, 256);
  const Matrix logits = forward_logits(p, c, batch);
  EXPECT_TRUE(logits.allFinite());
}

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

void gradient_check(const TransformerConfig& c, Mode mode, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p = ModelParams::init(c, rng);
  // Move gains and biases off their init values so their gradients are generic.
  for (auto* t : p.tensors()) {
    for (Eigen::Index i = 0; i < t->value.size(); ++i) {
      t->value.data()[i] += uniform_real(rng, -0.1, 0.1);
    }
  }
  const Sequences batch = random_batch(rng, 2, 3, c.vocab_size);
  const Rng start(seed + 1000);

  Rng fwd = start;
  const ForwardTrace trace = forward(p, c, batch, mode, &fwd);
  const LossResult loss = next_token_loss(trace.logits, next_token_targets(batch));
  backward(trace, p, loss.dlogits);

  const double h = 1e-4;
  double worst = 0.0;
  std::string worst_name;
  for (auto* t : p.tensors()) {
    for (Eigen::Index i = 0; i < t->value.size(); ++i) {
      double& w = t->value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = batch_loss(p, c, batch, mode, start);
      w = saved - h;
      const double down = batch_loss(p, c, batch, mode, start);
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = rel_error(t->grad.data()[i], numeric);
      if (err > worst) {
        worst = err;
        worst_name = t->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  EXPECT_LE(worst, 1e-3) << "worst at " << worst_name;
}

TEST(Backward, FiniteDifferenceTiny) { gradient_check(tiny_config(), Mode::kEval, 1); }

TEST(Backward, FiniteDifferenceWithDropoutMasks) {
  gradient_check(tiny_config(0.3), Mode::kTrain, 2);
}

TEST(Backward, FiniteDifferenceTwoLayersTwoHeads) {
  TransformerConfig c = tiny_config(0.1);
  c.num_layers = 2;
  c.num_heads = 2;
  gradient_check(c, Mode::kTrain, 3);
}

TEST(Backward, LinearInUpstreamGradient) {
  const TransformerConfig c = tiny_config();
  Rng rng(4);
  ModelParams p = ModelParams::init(c, rng);
  const Sequences batch = random_batch(rng, 2, 3, 16);
  const ForwardTrace t = forward(p, c, batch, Mode::kEval, nullptr);
  const LossResult loss = next_token_loss(t.logits, next_token_targets(batch));
  backward(t, p, loss.dlogits);
  std::vector<Matrix> once;
  for (const auto* x : p.tensors()) once.push_back(x->grad);
  backward(t, p, 2.0 * loss.dlogits);
  const auto tensors = p.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    EXPECT_TRUE(tensors[i]->grad.isApprox(2.0 * once[i], 1e-12) ||
                once[i].cwiseAbs().maxCoeff() == 0.0)
        << tensors[i]->name;
  }
}

TEST(Backward, UnusedEmbeddingRowsGetNoGradient) {
  const TransformerConfig c = tiny_config();
  Rng rng(4);
  ModelParams p = ModelParams::init(c, rng);
  const Sequences batch{{1, 2, 3}, {3, 2, 1}};
  const ForwardTrace t = forward(p, c, batch, Mode::kEval, nullptr);
  backward(t, p, next_token_loss(t.logits, next_token_targets(batch)).dlogits);
  for (int r = 0; r < 16; ++r) {
    const double norm = p.embedding.grad.row(r).norm();
    if (r >= 1 && r <= 3) {
      EXPECT_GT(norm, 0.0) << r;
    } else {
      EXPECT_EQ(norm, 0.0) << r;
    }
  }
}

TEST(Backward, StaleTraceAndShapeErrors) {
  const TransformerConfig c = tiny_config();
  Rng rng(4);
  ModelParams p = ModelParams::init(c, rng);
  const Sequences batch{{1, 2, 3}};
  const ForwardTrace t = forward(p, c, batch, Mode::kEval, nullptr);

  TransformerConfig wider = c;
  wider.d_ff = 32;
  ModelParams q = ModelParams::init(wider, rng);
  const LossResult loss = next_token_loss(t.logits, next_token_targets(batch));
  EXPECT_THROW(backward(t, q, loss.dlogits), StaleTraceError);
  EXPECT_THROW(backward(t, p, Matrix::Zero(2, 16)), ConfigError);
}

}  // namespace
}  // namespace spiro
