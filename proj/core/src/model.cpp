#include "spiro/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "model_internal.hpp"
#include "spiro/errors.hpp"

namespace spiro {

void TransformerConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(vocab_size, "vocab_size");
  positive(max_seq_len, "max_seq_len");
  if (d_model % 2 != 0) throw ConfigError("d_model must be even");
  if (d_model % num_heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) +
                      ") must be divisible by num_heads (" +
                      std::to_string(num_heads) + ")");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
}

ModelParams ModelParams::zeros(const TransformerConfig& config) {
  config.validate();
  const int d = config.d_model;
  const int f = config.d_ff;
  const int v = config.vocab_size;
  ModelParams p;
  p.embedding = Parameter("embedding", v, d);
  for (int i = 0; i < config.num_layers; ++i) {
    const std::string pre = "layer" + std::to_string(i) + ".";
    LayerParams l;
    l.ln1_gain = Parameter(pre + "ln1.gain", 1, d);
    l.ln1_bias = Parameter(pre + "ln1.bias", 1, d);
    l.w_q = Parameter(pre + "attn.w_q", d, d);
    l.b_q = Parameter(pre + "attn.b_q", 1, d);
    l.w_k = Parameter(pre + "attn.w_k", d, d);
    l.b_k = Parameter(pre + "attn.b_k", 1, d);
    l.w_v = Parameter(pre + "attn.w_v", d, d);
    l.b_v = Parameter(pre + "attn.b_v", 1, d);
    l.w_o = Parameter(pre + "attn.w_o", d, d);
    l.b_o = Parameter(pre + "attn.b_o", 1, d);
    l.ln2_gain = Parameter(pre + "ln2.gain", 1, d);
    l.ln2_bias = Parameter(pre + "ln2.bias", 1, d);
    l.w_ff1 = Parameter(pre + "ff.w1", d, f);
    l.b_ff1 = Parameter(pre + "ff.b1", 1, f);
    l.w_ff2 = Parameter(pre + "ff.w2", f, d);
    l.b_ff2 = Parameter(pre + "ff.b2", 1, d);
    p.layers.push_back(std::move(l));
  }
  p.lnf_gain = Parameter("final_ln.gain", 1, d);
  p.lnf_bias = Parameter("final_ln.bias", 1, d);
  p.w_out = Parameter("out.w", d, v);
  p.b_out = Parameter("out.b", 1, v);
  return p;
}

ModelParams ModelParams::init(const TransformerConfig& config, Rng& rng) {
  ModelParams p = zeros(config);
  auto fill_uniform = [&rng](Parameter& t, double bound) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      t.value.data()[i] = uniform_real(rng, -bound, bound);
    }
  };
  const double d_bound = 1.0 / std::sqrt(static_cast<double>(config.d_model));
  const double f_bound = 1.0 / std::sqrt(static_cast<double>(config.d_ff));
  fill_uniform(p.embedding, 1.0);
  for (auto& l : p.layers) {
    l.ln1_gain.value.setOnes();
    l.ln2_gain.value.setOnes();
    fill_uniform(l.w_q, d_bound);
    fill_uniform(l.w_k, d_bound);
    fill_uniform(l.w_v, d_bound);
    fill_uniform(l.w_o, d_bound);
    fill_uniform(l.w_ff1, d_bound);
    fill_uniform(l.w_ff2, f_bound);
  }
  p.lnf_gain.value.setOnes();
  fill_uniform(p.w_out, d_bound);
  return p;
}

namespace {

template <typename P, typename Self>
std::vector<P*> collect(Self& self) {
  std::vector<P*> out;
  out.push_back(&self.embedding);
  for (auto& l : self.layers) {
    for (P* t : {&l.ln1_gain, &l.ln1_bias, &l.w_q, &l.b_q, &l.w_k, &l.b_k,
                 &l.w_v, &l.b_v, &l.w_o, &l.b_o, &l.ln2_gain, &l.ln2_bias,
                 &l.w_ff1, &l.b_ff1, &l.w_ff2, &l.b_ff2}) {
      out.push_back(t);
    }
  }
  out.push_back(&self.lnf_gain);
  out.push_back(&self.lnf_bias);
  out.push_back(&self.w_out);
  out.push_back(&self.b_out);
  return out;
}

}  // namespace

std::vector<Parameter*> ModelParams::tensors() {
  return collect<Parameter>(*this);
}

std::vector<const Parameter*> ModelParams::tensors() const {
  return collect<const Parameter>(*this);
}

void ModelParams::zero_grad() {
  for (auto* t : tensors()) t->grad.setZero();
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += static_cast<std::size_t>(t->value.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto* t : tensors()) {
    if (!t->value.allFinite()) return false;
  }
  return true;
}

void ModelParams::check_shapes(const TransformerConfig& config) const {
  const ModelParams ref = zeros(config);
  const auto mine = tensors();
  const auto want = ref.tensors();
  if (mine.size() != want.size()) {
    throw ConfigError("parameter set has " + std::to_string(mine.size()) +
                      " tensors, config implies " +
                      std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const auto& a = mine[i]->value;
    const auto& b = want[i]->value;
    if (a.rows() != b.rows() || a.cols() != b.cols() ||
        mine[i]->grad.rows() != a.rows() || mine[i]->grad.cols() != a.cols()) {
      throw ConfigError("tensor '" + want[i]->name + "' has shape " +
                        std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + ", expected " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
    }
  }
}

std::vector<double> positional_encoding(int position, int d_model) {
  if (position < 0) throw ConfigError("negative position");
  if (d_model < 2 || d_model % 2 != 0) {
    throw ConfigError("positional encoding needs an even d_model");
  }
  std::vector<double> pe(static_cast<std::size_t>(d_model));
  for (int k = 0; k < d_model / 2; ++k) {
    const double freq =
        std::pow(10000.0, -2.0 * k / static_cast<double>(d_model));
    pe[2 * k] = std::sin(position * freq);
    pe[2 * k + 1] = std::cos(position * freq);
  }
  return pe;
}

MaskMatrix causal_mask(int seq_len) {
  if (seq_len < 1) throw ConfigError("sequence length must be positive");
  MaskMatrix m(seq_len, seq_len);
  for (int i = 0; i < seq_len; ++i) {
    for (int j = 0; j < seq_len; ++j) m(i, j) = j > i;
  }
  return m;
}

namespace detail {

Matrix layer_norm(const Matrix& x, const Parameter& gain,
                  const Parameter& bias, LayerNormCache& cache) {
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / d;
    const double var = (x.row(r).array() - mean).square().sum() / d;
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.rstd(r) = rstd;
    cache.xhat.row(r) = (x.row(r).array() - mean) * rstd;
  }
  Matrix y = cache.xhat.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  return y;
}

Matrix gelu(const Matrix& z) {
  const Eigen::ArrayXXd u = kGeluC * (z.array() + 0.044715 * z.array().cube());
  // tanh(u) = 1 - 2 / (exp(2u) + 1), using the vectorized exp
  const Eigen::ArrayXXd t = 1.0 - 2.0 / ((2.0 * u).exp() + 1.0);
  return (0.5 * z.array() * (1.0 + t)).matrix();
}

Matrix gelu_grad(const Matrix& z) {
  const Eigen::ArrayXXd u = kGeluC * (z.array() + 0.044715 * z.array().cube());
  const Eigen::ArrayXXd t = 1.0 - 2.0 / ((2.0 * u).exp() + 1.0);
  return (0.5 * (1.0 + t) + 0.5 * z.array() * (1.0 - t.square()) * kGeluC *
                                (1.0 + 3.0 * 0.044715 * z.array().square()))
      .matrix();
}

// Inverted dropout mask restricted to `active` entries: each kept entry is
// scaled by 1/(1-p). Entries outside `active` stay 0 and draw nothing.
template <typename Active>
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng,
                    Active active) {
  Matrix m = Matrix::Zero(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!active(i, j)) continue;
      m(i, j) = uniform01(rng) < p ? 0.0 : keep_scale;
    }
  }
  return m;
}

}  // namespace detail

namespace {

std::vector<std::pair<Eigen::Index, Eigen::Index>> shape_signature(
    const ModelParams& params) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto* t : params.tensors()) {
    out.emplace_back(t->value.rows(), t->value.cols());
  }
  return out;
}

void attention_forward(const TransformerConfig& config, int batch, int seq_len,
                       const MaskMatrix& mask, bool use_dropout, Rng* rng,
                       LayerTrace& lt) {
  const int heads = config.num_heads;
  const int dh = config.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index n = static_cast<Eigen::Index>(batch) * seq_len;
  lt.attn_concat.setZero(n, config.d_model);
  lt.probs.assign(static_cast<std::size_t>(batch * heads), Matrix());
  lt.attn_dropout.assign(use_dropout ? static_cast<std::size_t>(batch * heads)
                                     : 0,
                         Matrix());
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(b) * seq_len;
    for (int h = 0; h < heads; ++h) {
      const auto q = lt.q.block(row0, h * dh, seq_len, dh);
      const auto k = lt.k.block(row0, h * dh, seq_len, dh);
      const auto v = lt.v.block(row0, h * dh, seq_len, dh);
      Matrix s;
      s.noalias() = q * k.transpose();
      // row i attends to columns 0..i, the rest of p stays exactly 0
      Matrix p = Matrix::Zero(seq_len, seq_len);
      for (int i = 0; i < seq_len; ++i) {
        auto row = s.row(i).head(i + 1).array() * scale;
        const double row_max = row.maxCoeff();
        p.row(i).head(i + 1) = (row - row_max).exp().matrix();
        p.row(i).head(i + 1) /= p.row(i).head(i + 1).sum();
      }
      const std::size_t slot = static_cast<std::size_t>(b * heads + h);
      auto out = lt.attn_concat.block(row0, h * dh, seq_len, dh);
      if (use_dropout) {
        Matrix m = detail::dropout_mask(
            seq_len, seq_len, config.dropout_rate, *rng,
            [&mask](Eigen::Index i, Eigen::Index j) { return !mask(i, j); });
        const Matrix pd = p.cwiseProduct(m);
        out.noalias() = pd.triangularView<Eigen::Lower>() * v;
        lt.attn_dropout[slot] = std::move(m);
      } else {
        out.noalias() = p.triangularView<Eigen::Lower>() * v;
      }
      lt.probs[slot] = std::move(p);
    }
  }
}

}  // namespace

ForwardTrace forward(const ModelParams& params, const TransformerConfig& config,
                     TokenBatch batch, Mode mode, Rng* rng) {
  config.validate();
  params.check_shapes(config);
  if (batch.empty()) throw ConfigError("forward called with an empty batch");
  const auto seq_len = static_cast<int>(batch.front().size());
  if (seq_len < 1 || seq_len > config.max_seq_len) {
    throw ConfigError("sequence length " + std::to_string(seq_len) +
                      " outside [1, " + std::to_string(config.max_seq_len) +
                      "]");
  }
  const bool use_dropout = mode == Mode::kTrain && config.dropout_rate > 0.0;
  if (use_dropout && rng == nullptr) {
    throw ConfigError("train-mode forward with dropout needs an RNG");
  }

  ForwardTrace tr;
  tr.batch = static_cast<int>(batch.size());
  tr.seq_len = seq_len;
  tr.mode = mode;
  tr.config = config;
  tr.shapes = shape_signature(params);
  if (rng != nullptr) tr.rng_at_start = *rng;
  tr.tokens.reserve(batch.size() * static_cast<std::size_t>(seq_len));
  for (const auto& seq : batch) {
    if (static_cast<int>(seq.size()) != seq_len) {
      throw ConfigError("all sequences in a batch must share one length");
    }
    for (int t : seq) {
      if (t < 0 || t >= config.vocab_size) {
        throw ConfigError("token " + std::to_string(t) +
                          " outside vocabulary of size " +
                          std::to_string(config.vocab_size));
      }
      tr.tokens.push_back(t);
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(tr.batch) * seq_len;
  const int d = config.d_model;
  Matrix pe(seq_len, d);
  for (int t = 0; t < seq_len; ++t) {
    const auto row = positional_encoding(t, d);
    for (int c = 0; c < d; ++c) pe(t, c) = row[static_cast<std::size_t>(c)];
  }
  Matrix x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    x.row(r) = params.embedding.value.row(tr.tokens[static_cast<std::size_t>(r)]) +
               pe.row(r % seq_len);
  }

  const MaskMatrix mask = causal_mask(seq_len);
  tr.layers.resize(params.layers.size());
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const LayerParams& L = params.layers[li];
    LayerTrace& lt = tr.layers[li];
    lt.input = x;
    lt.a1 = detail::layer_norm(x, L.ln1_gain, L.ln1_bias, lt.ln1);
    lt.q.noalias() = lt.a1 * L.w_q.value;
    lt.q.rowwise() += L.b_q.value.row(0);
    lt.k.noalias() = lt.a1 * L.w_k.value;
    lt.k.rowwise() += L.b_k.value.row(0);
    lt.v.noalias() = lt.a1 * L.w_v.value;
    lt.v.rowwise() += L.b_v.value.row(0);
    attention_forward(config, tr.batch, seq_len, mask, use_dropout, rng, lt);

    lt.mid = x;
    lt.mid.noalias() += lt.attn_concat * L.w_o.value;
    lt.mid.rowwise() += L.b_o.value.row(0);

    lt.a2 = detail::layer_norm(lt.mid, L.ln2_gain, L.ln2_bias, lt.ln2);
    lt.ff_pre.noalias() = lt.a2 * L.w_ff1.value;
    lt.ff_pre.rowwise() += L.b_ff1.value.row(0);
    lt.ff_act = detail::gelu(lt.ff_pre);
    if (use_dropout) {
      lt.ff_dropout = detail::dropout_mask(
          lt.ff_act.rows(), lt.ff_act.cols(), config.dropout_rate, *rng,
          [](Eigen::Index, Eigen::Index) { return true; });
      lt.ff_act.array() *= lt.ff_dropout.array();
    } else {
      lt.ff_dropout.resize(0, 0);
    }
    x = lt.mid;
    x.noalias() += lt.ff_act * L.w_ff2.value;
    x.rowwise() += L.b_ff2.value.row(0);
  }

  tr.final_norm = detail::layer_norm(x, params.lnf_gain, params.lnf_bias, tr.lnf);
  tr.logits.noalias() = tr.final_norm * params.w_out.value;
  tr.logits.rowwise() += params.b_out.value.row(0);
  return tr;
}

Matrix forward_logits(const ModelParams& params,
                      const TransformerConfig& config, TokenBatch batch) {
  return forward(params, config, batch, Mode::kEval, nullptr).logits;
}

ForwardTrace replay(const ForwardTrace& trace, const ModelParams& params) {
  std::vector<std::vector<int>> batch(static_cast<std::size_t>(trace.batch));
  for (int b = 0; b < trace.batch; ++b) {
    const auto first = trace.tokens.begin() + b * trace.seq_len;
    batch[static_cast<std::size_t>(b)].assign(first, first + trace.seq_len);
  }
  Rng rng = trace.rng_at_start;
  return forward(params, trace.config, batch, trace.mode, &rng);
}

}  // namespace spiro
