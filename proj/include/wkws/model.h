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

#ifndef WKWS_MODEL_H_
#define WKWS_MODEL_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wkws/features.h"
#include "wkws/rng.h"

namespace wkws {

// Shape of the temporal-convolution residual network. The defaults give
// the 8-layer variant (about 66k trainable parameters); tests shrink it.
struct ModelConfig {
  int n_mels = kNumMels;
  int stem_channels = 16;
  std::vector<int> block_channels = {24, 32, 48};
  int n_classes = 11;
  int stem_kernel = 3;
  int block_kernel = 9;

  // Shortest input that survives every stride-2 stage.
  int min_frames() const { return 1 << block_channels.size(); }
  bool operator==(const ModelConfig&) const = default;
};

inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kBatchNormEpsilon = 1e-5;

template <typename S>
struct Tensor {
  std::vector<int> shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, S fill = S(0));
  std::size_t size() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

// Convolution (no bias) followed by batch norm.
template <typename S>
struct ConvBn {
  Tensor<S> weight;  // [out, in, kernel]
  Tensor<S> gamma;   // [out]
  Tensor<S> beta;
  Tensor<S> running_mean;
  Tensor<S> running_var;
  int stride = 1;
  bool operator==(const ConvBn&) const = default;
};

template <typename S>
struct ResidualBlock {
  ConvBn<S> conv1;     // kernel 9, stride 2
  ConvBn<S> conv2;     // kernel 9, stride 1
  ConvBn<S> shortcut;  // kernel 1, stride 2
  bool operator==(const ResidualBlock&) const = default;
};

template <typename S>
struct BasicModelParams {
  ModelConfig config;
  ConvBn<S> stem;
  std::vector<ResidualBlock<S>> blocks;
  Tensor<S> fc_weight;  // [classes, channels]
  Tensor<S> fc_bias;    // [classes]
  bool operator==(const BasicModelParams&) const = default;
};

using ModelParams = BasicModelParams<float>;

// Gradients for the trainable tensors, in ForEachTensor order.
template <typename S>
struct BasicGradientSet {
  std::vector<Tensor<S>> tensors;
};

using GradientSet = BasicGradientSet<float>;

struct TensorInfo {
  std::string name;
  bool trainable;
};

// Visits every tensor (trainable and running statistics) in a fixed
// canonical order with a stable name.
template <typename S>
void ForEachTensor(BasicModelParams<S>& params,
                   const std::function<void(const TensorInfo&, Tensor<S>&)>& fn);
template <typename S>
void ForEachTensor(const BasicModelParams<S>& params,
                   const std::function<void(const TensorInfo&, const Tensor<S>&)>& fn);

// Pointers to the trainable tensors in canonical order.
template <typename S>
std::vector<Tensor<S>*> TrainableTensors(BasicModelParams<S>& params);
template <typename S>
std::vector<const Tensor<S>*> TrainableTensors(const BasicModelParams<S>& params);

// Allocates all tensors with the right shapes; weights zero, BN identity.
template <typename S>
BasicModelParams<S> MakeParams(const ModelConfig& config);

// Kaiming-uniform fan-in weights (bound 1/sqrt(fan_in), the PyTorch
// default), FC bias likewise; BN scale 1, shift 0, mean 0, variance 1.
ModelParams InitModel(Rng& rng, const ModelConfig& config = {});

template <typename S>
std::size_t ParamCount(const BasicModelParams<S>& params);

template <typename T, typename S>
BasicModelParams<T> CastParams(const BasicModelParams<S>& params);

enum class Mode { kTrain, kEval };

// Per-channel batch statistics of every BN layer in canonical order; mean
// and biased variance over (batch, time).
struct BatchNormStats {
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;
  std::size_t count = 0;
};

// Row-major B x n_classes logits. Eval mode uses running statistics and is
// pure. Train mode normalizes with batch statistics and folds them into
// the running statistics (momentum 0.1).
template <typename S>
std::vector<S> Forward(BasicModelParams<S>& params, const Batch& batch, Mode mode);
template <typename S>
std::vector<S> ForwardEval(const BasicModelParams<S>& params, const Batch& batch);

template <typename S>
struct BackwardResult {
  S loss = 0;
  BasicGradientSet<S> grads;
  std::vector<S> logits;
  BatchNormStats stats;
};

// Mean cross-entropy with train-mode batch norm, and its exact gradient
// with respect to every trainable tensor. Does not modify params.
template <typename S>
BackwardResult<S> Backward(const BasicModelParams<S>& params, const Batch& batch,
                           std::span<const int> labels);

// running = (1 - momentum) * running + momentum * batch, with the
// unbiased variance.
template <typename S>
void UpdateRunningStats(BasicModelParams<S>& params, const BatchNormStats& stats,
                        double momentum = kBatchNormMomentum);

// Mean softmax cross-entropy of row-major logits.
template <typename S>
double CrossEntropy(std::span<const S> logits, std::span<const int> labels,
                    int n_classes);

std::vector<double> Softmax(std::span<const float> row);

}  // namespace wkws

#endif  // WKWS_MODEL_H_
