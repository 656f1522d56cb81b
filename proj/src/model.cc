// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkws/model.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "wkws/error.h"

namespace wkws {

template <typename S>
Tensor<S>::Tensor(std::vector<int> s, S fill) : shape(std::move(s)) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  data.assign(n, fill);
}

namespace {

// Activations laid out [batch][channel][time].
template <typename S>
struct Act {
  int b = 0, c = 0, t = 0;
  std::vector<S> v;

  Act() = default;
  Act(int b_, int c_, int t_) : b(b_), c(c_), t(t_), v(std::size_t(b_) * c_ * t_, S(0)) {}
  S* ch(int bi, int ci) { return v.data() + (std::size_t(bi) * c + ci) * t; }
  const S* ch(int bi, int ci) const { return v.data() + (std::size_t(bi) * c + ci) * t; }
};

int OutLen(int t, int stride) { return (t + stride - 1) / stride; }

// Range of output steps whose input index t*stride + shift is in [0, t_in).
std::pair<int, int> ValidRange(int t_in, int t_out, int stride, int shift) {
  const int lo = shift >= 0 ? 0 : (-shift + stride - 1) / stride;
  const int last = t_in - 1 - shift;
  const int hi = last < 0 ? 0 : std::min(t_out, last / stride + 1);
  return {lo, std::max(lo, hi)};
}

template <typename S>
Act<S> Conv(const Act<S>& x, const Tensor<S>& w, int stride) {
  const int c_out = w.shape[0], c_in = w.shape[1], k = w.shape[2];
  const int pad = (k - 1) / 2;
  const int t_out = OutLen(x.t, stride);
  Act<S> y(x.b, c_out, t_out);
  for (int b = 0; b < x.b; ++b) {
    for (int o = 0; o < c_out; ++o) {
      S* yo = y.ch(b, o);
      for (int c = 0; c < c_in; ++c) {
        const S* xc = x.ch(b, c);
        const S* wk = w.data.data() + (std::size_t(o) * c_in + c) * k;
        for (int j = 0; j < k; ++j) {
          const S wv = wk[j];
          const int shift = j - pad;
          const auto [lo, hi] = ValidRange(x.t, t_out, stride, shift);
          if (stride == 1) {
            const S* xs = xc + shift;
            for (int t = lo; t < hi; ++t) yo[t] += wv * xs[t];
          } else {
            for (int t = lo; t < hi; ++t) yo[t] += wv * xc[t * stride + shift];
          }
        }
      }
    }
  }
  return y;
}

// Accumulates dW and, when dx is non-null, the input gradient.
template <typename S>
void ConvBackward(const Act<S>& x, const Tensor<S>& w, int stride,
                  const Act<S>& dy, Tensor<S>& dw, Act<S>* dx) {
  const int c_out = w.shape[0], c_in = w.shape[1], k = w.shape[2];
  const int pad = (k - 1) / 2;
  for (int b = 0; b < x.b; ++b) {
    for (int o = 0; o < c_out; ++o) {
      const S* go = dy.ch(b, o);
      for (int c = 0; c < c_in; ++c) {
        const S* xc = x.ch(b, c);
        S* gx = dx ? dx->ch(b, c) : nullptr;
        const std::size_t base = (std::size_t(o) * c_in + c) * k;
        const S* wk = w.data.data() + base;
        S* gw = dw.data.data() + base;
        for (int j = 0; j < k; ++j) {
          const int shift = j - pad;
          const auto [lo, hi] = ValidRange(x.t, dy.t, stride, shift);
          S acc = 0;
          if (stride == 1) {
            const S* xs = xc + shift;
            for (int t = lo; t < hi; ++t) acc += go[t] * xs[t];
            if (gx) {
              S* gs = gx + shift;
              const S wv = wk[j];
              for (int t = lo; t < hi; ++t) gs[t] += wv * go[t];
            }
          } else {
            for (int t = lo; t < hi; ++t) acc += go[t] * xc[t * stride + shift];
            if (gx) {
              const S wv = wk[j];
              for (int t = lo; t < hi; ++t) gx[t * stride + shift] += wv * go[t];
            }
          }
          gw[j] += acc;
        }
      }
    }
  }
}

template <typename S>
struct BnCache {
  Act<S> xhat;
  std::vector<S> inv_std;
};

// Normalizes z in place. Train mode records statistics into `stats`.
template <typename S>
void BatchNorm(Act<S>& z, const ConvBn<S>& p, Mode mode, BnCache<S>* cache,
               BatchNormStats* stats) {
  const std::size_t n = std::size_t(z.b) * z.t;
  if (cache) {
    cache->xhat = Act<S>(z.b, z.c, z.t);
    cache->inv_std.assign(z.c, S(0));
  }
  std::vector<double> means(z.c), vars(z.c);
  for (int c = 0; c < z.c; ++c) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (int b = 0; b < z.b; ++b) {
        const S* x = z.ch(b, c);
        for (int t = 0; t < z.t; ++t) sum += x[t];
      }
      mean = sum / n;
      double sq = 0.0;
      for (int b = 0; b < z.b; ++b) {
        const S* x = z.ch(b, c);
        for (int t = 0; t < z.t; ++t) {
          const double d = x[t] - mean;
          sq += d * d;
        }
      }
      var = sq / n;
    } else {
      mean = p.running_mean.data[c];
      var = p.running_var.data[c];
    }
    means[c] = mean;
    vars[c] = var;
    const S inv_std = static_cast<S>(1.0 / std::sqrt(var + kBatchNormEpsilon));
    const S m = static_cast<S>(mean);
    const S g = p.gamma.data[c], be = p.beta.data[c];
    for (int b = 0; b < z.b; ++b) {
      S* x = z.ch(b, c);
      S* xh = cache ? cache->xhat.ch(b, c) : nullptr;
      for (int t = 0; t < z.t; ++t) {
        const S h = (x[t] - m) * inv_std;
        if (xh) xh[t] = h;
        x[t] = g * h + be;
      }
    }
    if (cache) cache->inv_std[c] = inv_std;
  }
  if (stats) {
    stats->mean.push_back(std::move(means));
    stats->var.push_back(std::move(vars));
    stats->count = n;
  }
}

// dy is overwritten with the gradient w.r.t. the BN input.
template <typename S>
void BatchNormBackward(Act<S>& dy, const ConvBn<S>& p, const BnCache<S>& cache,
                       Tensor<S>& dgamma, Tensor<S>& dbeta) {
  const double n = double(dy.b) * dy.t;
  for (int c = 0; c < dy.c; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < dy.b; ++b) {
      const S* g = dy.ch(b, c);
      const S* xh = cache.xhat.ch(b, c);
      for (int t = 0; t < dy.t; ++t) {
        sum_dy += g[t];
        sum_dy_xhat += double(g[t]) * xh[t];
      }
    }
    dgamma.data[c] += static_cast<S>(sum_dy_xhat);
    dbeta.data[c] += static_cast<S>(sum_dy);
    const S scale = static_cast<S>(p.gamma.data[c] * cache.inv_std[c] / n);
    const S s_dy = static_cast<S>(sum_dy);
    const S s_dy_xhat = static_cast<S>(sum_dy_xhat);
    const S nn = static_cast<S>(n);
    for (int b = 0; b < dy.b; ++b) {
      S* g = dy.ch(b, c);
      const S* xh = cache.xhat.ch(b, c);
      for (int t = 0; t < dy.t; ++t) {
        g[t] = scale * (nn * g[t] - s_dy - xh[t] * s_dy_xhat);
      }
    }
  }
}

template <typename S>
void Relu(Act<S>& a) {
  for (S& v : a.v) v = v > S(0) ? v : S(0);
}

// Zeroes gradient where the ReLU output was not positive.
template <typename S>
void ReluBackward(Act<S>& grad, const Act<S>& out) {
  for (std::size_t i = 0; i < grad.v.size(); ++i) {
    if (!(out.v[i] > S(0))) grad.v[i] = S(0);
  }
}

template <typename S>
struct ConvBnCache {
  Act<S> input;
  BnCache<S> bn;
};

template <typename S>
struct BlockCache {
  ConvBnCache<S> conv1, conv2, shortcut;
  Act<S> out;  // post-ReLU
};

template <typename S>
struct NetCache {
  ConvBnCache<S> stem;
  Act<S> stem_out;
  std::vector<BlockCache<S>> blocks;
  std::vector<S> pooled;  // [B][C]
  int pooled_channels = 0;
  int pooled_frames = 0;
};

template <typename S>
Act<S> ConvBnForward(const Act<S>& x, const ConvBn<S>& p, Mode mode,
                     ConvBnCache<S>* cache, BatchNormStats* stats) {
  Act<S> z = Conv(x, p.weight, p.stride);
  BatchNorm(z, p, mode, cache ? &cache->bn : nullptr, stats);
  if (cache) cache->input = x;
  return z;
}

template <typename S>
Act<S> InputActivation(const BasicModelParams<S>& params, const Batch& batch) {
  const ModelConfig& cfg = params.config;
  if (batch.batch_size < 1) throw DomainError("empty batch");
  if (batch.bins != cfg.n_mels) {
    throw DomainError("batch has " + std::to_string(batch.bins) +
                      " feature bins, model expects " + std::to_string(cfg.n_mels));
  }
  if (batch.max_frames < cfg.min_frames()) {
    throw DomainError("input of " + std::to_string(batch.max_frames) +
                      " frames is shorter than the minimum " +
                      std::to_string(cfg.min_frames()));
  }
  Act<S> x(batch.batch_size, batch.bins, batch.max_frames);
  for (int b = 0; b < batch.batch_size; ++b) {
    for (int t = 0; t < batch.max_frames; ++t) {
      for (int m = 0; m < batch.bins; ++m) {
        x.ch(b, m)[t] = static_cast<S>(batch.at(b, t, m));
      }
    }
  }
  return x;
}

template <typename S>
std::vector<S> RunNetwork(const BasicModelParams<S>& params, const Batch& batch,
                          Mode mode, NetCache<S>* cache, BatchNormStats* stats) {
  Act<S> x = InputActivation(params, batch);

  Act<S> a = ConvBnForward(x, params.stem, mode, cache ? &cache->stem : nullptr, stats);
  Relu(a);
  if (cache) {
    cache->stem_out = a;
    cache->blocks.resize(params.blocks.size());
  }
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const ResidualBlock<S>& blk = params.blocks[i];
    BlockCache<S>* bc = cache ? &cache->blocks[i] : nullptr;
    Act<S> h = ConvBnForward(a, blk.conv1, mode, bc ? &bc->conv1 : nullptr, stats);
    Relu(h);
    Act<S> r = ConvBnForward(h, blk.conv2, mode, bc ? &bc->conv2 : nullptr, stats);
    Act<S> s = ConvBnForward(a, blk.shortcut, mode, bc ? &bc->shortcut : nullptr, stats);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] += s.v[k];
    Relu(r);
    if (bc) bc->out = r;
    a = std::move(r);
  }

  std::vector<S> pooled(std::size_t(a.b) * a.c);
  for (int b = 0; b < a.b; ++b) {
    for (int c = 0; c < a.c; ++c) {
      const S* p = a.ch(b, c);
      S sum = 0;
      for (int t = 0; t < a.t; ++t) sum += p[t];
      pooled[std::size_t(b) * a.c + c] = sum / static_cast<S>(a.t);
    }
  }

  const int classes = params.config.n_classes;
  std::vector<S> logits(std::size_t(a.b) * classes);
  for (int b = 0; b < a.b; ++b) {
    for (int k = 0; k < classes; ++k) {
      S acc = params.fc_bias.data[k];
      const S* w = params.fc_weight.data.data() + std::size_t(k) * a.c;
      const S* p = pooled.data() + std::size_t(b) * a.c;
      for (int c = 0; c < a.c; ++c) acc += w[c] * p[c];
      logits[std::size_t(b) * classes + k] = acc;
    }
  }
  if (cache) {
    cache->pooled = std::move(pooled);
    cache->pooled_channels = a.c;
    cache->pooled_frames = a.t;
  }
  return logits;
}

template <typename S>
void ConvBnBackward(Act<S>& dz, const ConvBn<S>& p, const ConvBnCache<S>& cache,
                    Tensor<S>* const* g, Act<S>* dx) {
  BatchNormBackward(dz, p, cache.bn, *g[1], *g[2]);
  ConvBackward(cache.input, p.weight, p.stride, dz, *g[0], dx);
}

}  // namespace

template <typename S>
void ForEachTensor(BasicModelParams<S>& params,
                   const std::function<void(const TensorInfo&, Tensor<S>&)>& fn) {
  auto visit = [&](const std::string& prefix, ConvBn<S>& cb) {
    fn({prefix + ".weight", true}, cb.weight);
    fn({prefix + ".gamma", true}, cb.gamma);
    fn({prefix + ".beta", true}, cb.beta);
    fn({prefix + ".running_mean", false}, cb.running_mean);
    fn({prefix + ".running_var", false}, cb.running_var);
  };
  visit("stem", params.stem);
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    visit(p + ".conv1", params.blocks[i].conv1);
    visit(p + ".conv2", params.blocks[i].conv2);
    visit(p + ".shortcut", params.blocks[i].shortcut);
  }
  fn({"fc.weight", true}, params.fc_weight);
  fn({"fc.bias", true}, params.fc_bias);
}

template <typename S>
void ForEachTensor(const BasicModelParams<S>& params,
                   const std::function<void(const TensorInfo&, const Tensor<S>&)>& fn) {
  ForEachTensor<S>(const_cast<BasicModelParams<S>&>(params),
                   [&](const TensorInfo& info, Tensor<S>& t) { fn(info, t); });
}

template <typename S>
std::vector<Tensor<S>*> TrainableTensors(BasicModelParams<S>& params) {
  std::vector<Tensor<S>*> out;
  ForEachTensor<S>(params, [&](const TensorInfo& info, Tensor<S>& t) {
    if (info.trainable) out.push_back(&t);
  });
  return out;
}

template <typename S>
std::vector<const Tensor<S>*> TrainableTensors(const BasicModelParams<S>& params) {
  std::vector<const Tensor<S>*> out;
  for (Tensor<S>* t : TrainableTensors(const_cast<BasicModelParams<S>&>(params))) {
    out.push_back(t);
  }
  return out;
}

template <typename S>
BasicModelParams<S> MakeParams(const ModelConfig& config) {
  if (config.n_mels < 1 || config.stem_channels < 1 || config.n_classes < 2 ||
      config.block_channels.empty()) {
    throw DomainError("invalid model configuration");
  }
  auto conv_bn = [](int in, int out, int kernel, int stride) {
    ConvBn<S> cb;
    cb.weight = Tensor<S>({out, in, kernel});
    cb.gamma = Tensor<S>({out}, S(1));
    cb.beta = Tensor<S>({out});
    cb.running_mean = Tensor<S>({out});
    cb.running_var = Tensor<S>({out}, S(1));
    cb.stride = stride;
    return cb;
  };
  BasicModelParams<S> p;
  p.config = config;
  p.stem = conv_bn(config.n_mels, config.stem_channels, config.stem_kernel, 1);
  int in = config.stem_channels;
  for (int out : config.block_channels) {
    ResidualBlock<S> blk;
    blk.conv1 = conv_bn(in, out, config.block_kernel, 2);
    blk.conv2 = conv_bn(out, out, config.block_kernel, 1);
    blk.shortcut = conv_bn(in, out, 1, 2);
    p.blocks.push_back(std::move(blk));
    in = out;
  }
  p.fc_weight = Tensor<S>({config.n_classes, in});
  p.fc_bias = Tensor<S>({config.n_classes});
  return p;
}

ModelParams InitModel(Rng& rng, const ModelConfig& config) {
  ModelParams p = MakeParams<float>(config);
  auto fill = [&](Tensor<float>& t, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (float& v : t.data) v = static_cast<float>(rng.Uniform(-bound, bound));
  };
  auto conv_fan_in = [](const Tensor<float>& w) { return w.shape[1] * w.shape[2]; };
  fill(p.stem.weight, conv_fan_in(p.stem.weight));
  for (auto& blk : p.blocks) {
    fill(blk.conv1.weight, conv_fan_in(blk.conv1.weight));
    fill(blk.conv2.weight, conv_fan_in(blk.conv2.weight));
    fill(blk.shortcut.weight, conv_fan_in(blk.shortcut.weight));
  }
  fill(p.fc_weight, p.fc_weight.shape[1]);
  fill(p.fc_bias, p.fc_weight.shape[1]);
  return p;
}

template <typename S>
std::size_t ParamCount(const BasicModelParams<S>& params) {
  std::size_t n = 0;
  for (const Tensor<S>* t : TrainableTensors(params)) n += t->size();
  return n;
}

template <typename T, typename S>
BasicModelParams<T> CastParams(const BasicModelParams<S>& params) {
  BasicModelParams<T> out = MakeParams<T>(params.config);
  std::vector<const Tensor<S>*> src;
  ForEachTensor<S>(params, [&](const TensorInfo&, const Tensor<S>& t) { src.push_back(&t); });
  std::size_t i = 0;
  ForEachTensor<T>(out, [&](const TensorInfo&, Tensor<T>& t) {
    for (std::size_t k = 0; k < t.size(); ++k) t.data[k] = static_cast<T>(src[i]->data[k]);
    ++i;
  });
  return out;
}

template <typename S>
std::vector<S> ForwardEval(const BasicModelParams<S>& params, const Batch& batch) {
  return RunNetwork<S>(params, batch, Mode::kEval, nullptr, nullptr);
}

template <typename S>
std::vector<S> Forward(BasicModelParams<S>& params, const Batch& batch, Mode mode) {
  if (mode == Mode::kEval) return ForwardEval(params, batch);
  BatchNormStats stats;
  std::vector<S> logits = RunNetwork<S>(params, batch, Mode::kTrain, nullptr, &stats);
  UpdateRunningStats(params, stats);
  return logits;
}

template <typename S>
void UpdateRunningStats(BasicModelParams<S>& params, const BatchNormStats& stats,
                        double momentum) {
  std::vector<ConvBn<S>*> layers{&params.stem};
  for (auto& blk : params.blocks) {
    layers.push_back(&blk.conv1);
    layers.push_back(&blk.conv2);
    layers.push_back(&blk.shortcut);
  }
  if (stats.mean.size() != layers.size()) {
    throw DomainError("batch-norm statistics do not match the model");
  }
  const double n = static_cast<double>(stats.count);
  const double unbias = n > 1 ? n / (n - 1) : 1.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    ConvBn<S>& cb = *layers[l];
    for (std::size_t c = 0; c < cb.running_mean.size(); ++c) {
      cb.running_mean.data[c] = static_cast<S>(
          (1 - momentum) * cb.running_mean.data[c] + momentum * stats.mean[l][c]);
      cb.running_var.data[c] = static_cast<S>(
          (1 - momentum) * cb.running_var.data[c] + momentum * stats.var[l][c] * unbias);
    }
  }
}

template <typename S>
double CrossEntropy(std::span<const S> logits, std::span<const int> labels,
                    int n_classes) {
  double total = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const S* row = logits.data() + b * n_classes;
    double mx = row[0];
    for (int k = 1; k < n_classes; ++k) mx = std::max<double>(mx, row[k]);
    double z = 0.0;
    for (int k = 0; k < n_classes; ++k) z += std::exp(double(row[k]) - mx);
    total += mx + std::log(z) - double(row[labels[b]]);
  }
  return total / static_cast<double>(labels.size());
}

std::vector<double> Softmax(std::span<const float> row) {
  double mx = -std::numeric_limits<double>::infinity();
  for (float v : row) mx = std::max<double>(mx, v);
  std::vector<double> out(row.size());
  double z = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    out[k] = std::exp(double(row[k]) - mx);
    z += out[k];
  }
  for (double& v : out) v /= z;
  return out;
}

template <typename S>
BackwardResult<S> Backward(const BasicModelParams<S>& params, const Batch& batch,
                           std::span<const int> labels) {
  const int classes = params.config.n_classes;
  if (labels.size() != static_cast<std::size_t>(batch.batch_size)) {
    throw DomainError("label count does not match batch size");
  }
  for (int l : labels) {
    if (l < 0 || l >= classes) {
      throw DomainError("label " + std::to_string(l) + " out of range");
    }
  }

  BackwardResult<S> result;
  NetCache<S> cache;
  result.logits = RunNetwork(params, batch, Mode::kTrain, &cache, &result.stats);
  result.loss = static_cast<S>(
      CrossEntropy<S>(result.logits, labels, classes));

  // Gradient tensors mirror the trainable tensors.
  BasicModelParams<S> grads = MakeParams<S>(params.config);
  ForEachTensor<S>(grads, [](const TensorInfo&, Tensor<S>& t) {
    std::fill(t.data.begin(), t.data.end(), S(0));
  });
  auto slots = [](ConvBn<S>& cb) {
    return std::array<Tensor<S>*, 3>{&cb.weight, &cb.gamma, &cb.beta};
  };

  const int bsz = batch.batch_size;
  const int ch = cache.pooled_channels;
  std::vector<S> dlogits(result.logits.size());
  for (int b = 0; b < bsz; ++b) {
    const S* row = result.logits.data() + std::size_t(b) * classes;
    double mx = row[0];
    for (int k = 1; k < classes; ++k) mx = std::max<double>(mx, row[k]);
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += std::exp(double(row[k]) - mx);
    for (int k = 0; k < classes; ++k) {
      double p = std::exp(double(row[k]) - mx) / z;
      if (k == labels[b]) p -= 1.0;
      dlogits[std::size_t(b) * classes + k] = static_cast<S>(p / bsz);
    }
  }

  std::vector<S> dpooled(std::size_t(bsz) * ch, S(0));
  for (int b = 0; b < bsz; ++b) {
    const S* p = cache.pooled.data() + std::size_t(b) * ch;
    for (int k = 0; k < classes; ++k) {
      const S g = dlogits[std::size_t(b) * classes + k];
      grads.fc_bias.data[k] += g;
      S* gw = grads.fc_weight.data.data() + std::size_t(k) * ch;
      const S* w = params.fc_weight.data.data() + std::size_t(k) * ch;
      for (int c = 0; c < ch; ++c) {
        gw[c] += g * p[c];
        dpooled[std::size_t(b) * ch + c] += g * w[c];
      }
    }
  }

  const int frames = cache.pooled_frames;
  Act<S> grad(bsz, ch, frames);
  for (int b = 0; b < bsz; ++b) {
    for (int c = 0; c < ch; ++c) {
      const S g = dpooled[std::size_t(b) * ch + c] / static_cast<S>(frames);
      S* d = grad.ch(b, c);
      for (int t = 0; t < frames; ++t) d[t] = g;
    }
  }

  for (std::size_t i = params.blocks.size(); i-- > 0;) {
    const ResidualBlock<S>& blk = params.blocks[i];
    const BlockCache<S>& bc = cache.blocks[i];
    ResidualBlock<S>& gb = grads.blocks[i];
    ReluBackward(grad, bc.out);

    const Act<S>& block_in = bc.conv1.input;
    Act<S> dx(block_in.b, block_in.c, block_in.t);

    Act<S> dshort = grad;
    ConvBnBackward(dshort, blk.shortcut, bc.shortcut, slots(gb.shortcut).data(), &dx);

    Act<S> dh(bc.conv2.input.b, bc.conv2.input.c, bc.conv2.input.t);
    ConvBnBackward(grad, blk.conv2, bc.conv2, slots(gb.conv2).data(), &dh);
    ReluBackward(dh, bc.conv2.input);
    ConvBnBackward(dh, blk.conv1, bc.conv1, slots(gb.conv1).data(), &dx);
    grad = std::move(dx);
  }

  ReluBackward(grad, cache.stem_out);
  ConvBnBackward(grad, params.stem, cache.stem, slots(grads.stem).data(),
                 static_cast<Act<S>*>(nullptr));

  for (Tensor<S>* t : TrainableTensors(grads)) {
    result.grads.tensors.push_back(std::move(*t));
  }
  return result;
}

#define WKWS_INSTANTIATE(S)                                                              \
  template struct Tensor<S>;                                                             \
  template void ForEachTensor<S>(BasicModelParams<S>&,                                   \
                                 const std::function<void(const TensorInfo&, Tensor<S>&)>&); \
  template void ForEachTensor<S>(                                                        \
      const BasicModelParams<S>&,                                                        \
      const std::function<void(const TensorInfo&, const Tensor<S>&)>&);                  \
  template std::vector<Tensor<S>*> TrainableTensors<S>(BasicModelParams<S>&);            \
  template std::vector<const Tensor<S>*> TrainableTensors<S>(const BasicModelParams<S>&); \
  template BasicModelParams<S> MakeParams<S>(const ModelConfig&);                        \
  template std::size_t ParamCount<S>(const BasicModelParams<S>&);                        \
  template std::vector<S> Forward<S>(BasicModelParams<S>&, const Batch&, Mode);          \
  template std::vector<S> ForwardEval<S>(const BasicModelParams<S>&, const Batch&);      \
  template BackwardResult<S> Backward<S>(const BasicModelParams<S>&, const Batch&,       \
                                         std::span<const int>);                          \
  template void UpdateRunningStats<S>(BasicModelParams<S>&, const BatchNormStats&, double); \
  template double CrossEntropy<S>(std::span<const S>, std::span<const int>, int);

WKWS_INSTANTIATE(float)
WKWS_INSTANTIATE(double)
#undef WKWS_INSTANTIATE

template BasicModelParams<double> CastParams<double, float>(const BasicModelParams<float>&);
template BasicModelParams<float> CastParams<float, double>(const BasicModelParams<double>&);
template BasicModelParams<float> CastParams<float, float>(const BasicModelParams<float>&);

}  // namespace wkws
