#pragma once

// Decoder-only transformer over quantized field tokens.
//
// Layout (pre-norm residual blocks):
//   x0 = E[token] + PE(position)
//   per layer:  h = x + Attn(LN1(x));  x' = h + FF(LN2(h))
//   logits = LN_f(x_L) W_out + b_out
// Attention is causal multi-head with dropout on the attention weights; the
// feed-forward block is Linear -> GELU -> dropout -> Linear.
//
// Activations are stacked row-wise: a batch of B sequences of length T is an
// (B*T) x d matrix, sequence b occupying rows [b*T, (b+1)*T).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spiro/random.hpp"

namespace spiro {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix =
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TransformerConfig {
  int num_layers = 2;
  int num_heads = 4;
  int d_model = 64;
  int d_ff = 128;
  int vocab_size = 256;
  int max_seq_len = 100;
  double dropout_rate = 0.2;

  // Throws ConfigError on non-positive sizes, odd d_model, d_model not
  // divisible by num_heads, or dropout outside [0, 1).
  void validate() const;

  friend bool operator==(const TransformerConfig&,
                         const TransformerConfig&) = default;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // always the shape of value

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)) {}
};

struct LayerParams {
  Parameter ln1_gain, ln1_bias;
  Parameter w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
  Parameter ln2_gain, ln2_bias;
  Parameter w_ff1, b_ff1, w_ff2, b_ff2;
};

class ModelParams {
 public:
  ModelParams() = default;

  // Shapes only, every value zero.
  static ModelParams zeros(const TransformerConfig& config);
  // Weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0, norm gains 1.
  // The embedding is a lookup with one active input, so its bound is 1.
  static ModelParams init(const TransformerConfig& config, Rng& rng);

  Parameter embedding;  // vocab x d
  std::vector<LayerParams> layers;
  Parameter lnf_gain, lnf_bias;
  Parameter w_out, b_out;  // d x vocab, 1 x vocab

  // Canonical order, shared by the optimizer and the checkpoint format.
  std::vector<Parameter*> tensors();
  std::vector<const Parameter*> tensors() const;

  void zero_grad();
  std::size_t parameter_count() const;
  bool all_finite() const;
  // Throws ConfigError unless every tensor has the shape config implies.
  void check_shapes(const TransformerConfig& config) const;
};

enum class Mode { kTrain, kEval };

// Sinusoidal encoding: entry 2k is sin(pos / 10000^(2k/d)), 2k+1 the cos.
std::vector<double> positional_encoding(int position, int d_model);

// true = masked (j > i). Row i has exactly i+1 unmasked entries.
MaskMatrix causal_mask(int seq_len);

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

struct LayerTrace {
  Matrix input;        // residual stream entering the block
  LayerNormCache ln1;
  Matrix a1;           // LN1 output
  Matrix q, k, v;
  // Per (sequence, head), index b * H + h; each T x T.
  std::vector<Matrix> probs;         // softmax output before dropout
  std::vector<Matrix> attn_dropout;  // multiplicative mask, empty if unused
  Matrix attn_concat;  // heads concatenated, before W_o
  Matrix mid;          // residual after attention
  LayerNormCache ln2;
  Matrix a2;
  Matrix ff_pre;       // before GELU
  Matrix ff_act;       // after GELU and dropout
  Matrix ff_dropout;   // empty if unused
};

struct ForwardTrace {
  std::vector<int> tokens;  // flattened B*T
  int batch = 0;
  int seq_len = 0;
  Mode mode = Mode::kEval;
  TransformerConfig config;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  Rng rng_at_start;  // replaying forward from here reproduces the masks

  std::vector<LayerTrace> layers;
  LayerNormCache lnf;
  Matrix final_norm;
  Matrix logits;  // (B*T) x vocab
};

using TokenBatch = std::span<const std::vector<int>>;

// All sequences in the batch must share one length in [1, max_seq_len].
// rng may be null in eval mode or when dropout_rate == 0; in train mode it
// advances by the number of dropout draws.
ForwardTrace forward(const ModelParams& params, const TransformerConfig& config,
                     TokenBatch batch, Mode mode, Rng* rng);

// Logits only; eval mode, no trace retained beyond the call.
Matrix forward_logits(const ModelParams& params,
                      const TransformerConfig& config, TokenBatch batch);

// Reruns forward with the trace's starting RNG state.
ForwardTrace replay(const ForwardTrace& trace, const ModelParams& params);

// Writes d(loss)/d(param) into every grad buffer (overwriting) given
// d(loss)/d(logits) of shape (B*T) x vocab.
void backward(const ForwardTrace& trace, ModelParams& params,
              const Matrix& dlogits);

}  // namespace spiro
