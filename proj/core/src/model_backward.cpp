#include <cmath>
#include <string>

#include "model_internal.hpp"
#include "spiro/errors.hpp"
#include "spiro/model.hpp"

namespace spiro {

namespace {

// Given dy for y = gain * xhat + bias, accumulates the gain/bias gradients
// and returns dx.
Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache,
                           Parameter& gain, Parameter& bias) {
  gain.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  bias.grad.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.value.row(0).array();
  const auto d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / d;
    const double mean_dx = dxhat.row(r).dot(cache.xhat.row(r)) / d;
    dx.row(r) = cache.rstd(r) *
                (dxhat.row(r).array() - mean_d -
                 cache.xhat.row(r).array() * mean_dx)
                    .matrix();
  }
  return dx;
}

void linear_backward(const Matrix& input, const Matrix& dout, Parameter& w,
                     Parameter& b) {
  w.grad.noalias() += input.transpose() * dout;
  b.grad.row(0) += dout.colwise().sum();
}

}  // namespace

void backward(const ForwardTrace& trace, ModelParams& params,
              const Matrix& dlogits) {
  const auto tensors = params.tensors();
  bool stale = tensors.size() != trace.shapes.size();
  for (std::size_t i = 0; !stale && i < tensors.size(); ++i) {
    stale = tensors[i]->value.rows() != trace.shapes[i].first ||
            tensors[i]->value.cols() != trace.shapes[i].second;
  }
  if (stale) {
    throw StaleTraceError("backward: parameter shapes changed since forward");
  }
  if (dlogits.rows() != trace.logits.rows() ||
      dlogits.cols() != trace.logits.cols()) {
    throw ConfigError("backward: logit gradient shape mismatch");
  }

  params.zero_grad();
  const TransformerConfig& config = trace.config;
  const int seq_len = trace.seq_len;
  const int heads = config.num_heads;
  const int dh = config.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  linear_backward(trace.final_norm, dlogits, params.w_out, params.b_out);
  Matrix dx = dlogits * params.w_out.value.transpose();
  dx = layer_norm_backward(dx, trace.lnf, params.lnf_gain, params.lnf_bias);

  for (std::size_t li = trace.layers.size(); li-- > 0;) {
    const LayerTrace& lt = trace.layers[li];
    LayerParams& L = params.layers[li];

    // x_out = mid + ff_act W2 + b2
    linear_backward(lt.ff_act, dx, L.w_ff2, L.b_ff2);
    Matrix dact = dx * L.w_ff2.value.transpose();
    if (lt.ff_dropout.size() != 0) dact.array() *= lt.ff_dropout.array();
    const Matrix dpre =
        dact.array() * detail::gelu_grad(lt.ff_pre).array();
    linear_backward(lt.a2, dpre, L.w_ff1, L.b_ff1);
    Matrix dmid = dx;
    dmid += layer_norm_backward(dpre * L.w_ff1.value.transpose(), lt.ln2,
                                L.ln2_gain, L.ln2_bias);

    // mid = input + concat W_o + b_o
    linear_backward(lt.attn_concat, dmid, L.w_o, L.b_o);
    const Matrix dconcat = dmid * L.w_o.value.transpose();
    Matrix dq = Matrix::Zero(lt.q.rows(), lt.q.cols());
    Matrix dk = Matrix::Zero(lt.k.rows(), lt.k.cols());
    Matrix dv = Matrix::Zero(lt.v.rows(), lt.v.cols());
    for (int b = 0; b < trace.batch; ++b) {
      const Eigen::Index row0 = static_cast<Eigen::Index>(b) * seq_len;
      for (int h = 0; h < heads; ++h) {
        const std::size_t slot = static_cast<std::size_t>(b * heads + h);
        const Matrix& p = lt.probs[slot];
        const bool dropped = !lt.attn_dropout.empty();
        const Matrix pd = dropped ? Matrix(p.cwiseProduct(lt.attn_dropout[slot]))
                                  : p;
        const auto d_out = dconcat.block(row0, h * dh, seq_len, dh);
        const auto q = lt.q.block(row0, h * dh, seq_len, dh);
        const auto k = lt.k.block(row0, h * dh, seq_len, dh);
        const auto v = lt.v.block(row0, h * dh, seq_len, dh);

        dv.block(row0, h * dh, seq_len, dh).noalias() =
            pd.transpose() * d_out;
        Matrix dp = d_out * v.transpose();
        if (dropped) dp.array() *= lt.attn_dropout[slot].array();
        // softmax: ds_ij = p_ij (dp_ij - sum_k p_ik dp_ik); p is 0 where masked
        Matrix ds(seq_len, seq_len);
        for (int i = 0; i < seq_len; ++i) {
          const double dot = p.row(i).dot(dp.row(i));
          ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
        }
        dq.block(row0, h * dh, seq_len, dh).noalias() = scale * ds * k;
        dk.block(row0, h * dh, seq_len, dh).noalias() =
            scale * ds.transpose() * q;
      }
    }
    linear_backward(lt.a1, dq, L.w_q, L.b_q);
    linear_backward(lt.a1, dk, L.w_k, L.b_k);
    linear_backward(lt.a1, dv, L.w_v, L.b_v);
    Matrix da1 = dq * L.w_q.value.transpose();
    da1.noalias() += dk * L.w_k.value.transpose();
    da1.noalias() += dv * L.w_v.value.transpose();
    dx = dmid;
    dx += layer_norm_backward(da1, lt.ln1, L.ln1_gain, L.ln1_bias);
  }

  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    params.embedding.grad.row(trace.tokens[static_cast<std::size_t>(r)]) +=
        dx.row(r);
  }
}

}  // namespace spiro
