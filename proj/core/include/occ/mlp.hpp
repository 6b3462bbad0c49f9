#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occ/matrix.hpp"

namespace occ {

enum class ActivationKind { ReLU, LeakyReLU, Tanh };

struct Activation {
  ActivationKind kind = ActivationKind::LeakyReLU;
  double slope = 0.01;  // LeakyReLU only

  double apply(double z) const noexcept;
  double derivative(double z) const noexcept;
  double secondDerivative(double z) const noexcept;

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string toString(ActivationKind kind);
ActivationKind parseActivationKind(const std::string& name);

/// One affine layer. The weight is stored fanIn x fanOut so a batch maps as
/// inputs * weight + bias.
struct LayerParams {
  Matrix weight;
  std::vector<double> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// A stack of layer tensors. Also used for gradients and optimizer moments.
using LayerStack = std::vector<LayerParams>;

/// Dense MLP. Hidden layers apply the activation; the output layer is linear.
struct ModelParams {
  LayerStack layers;
  Activation activation;

  std::size_t inputDim() const;
  std::size_t outputDim() const;
  std::size_t parameterCount() const noexcept;

  /// Throws DimensionError if adjacent layers do not compose.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Glorot-uniform weights, zero biases. dims = {input, hidden..., output}.
ModelParams makeMlp(std::span<const std::size_t> dims, Activation activation,
                    std::uint64_t seed);

/// The 2-hidden-layer configuration: input -> hidden -> hidden -> output.
ModelParams makeTwoHiddenLayerMlp(std::size_t inputDim, std::size_t hiddenDim,
                                  std::size_t outputDim, Activation activation,
                                  std::uint64_t seed);

LayerStack zerosLike(const LayerStack& layers);
/// dst += k * src
void addScaled(LayerStack& dst, const LayerStack& src, double k);
/// grads.weight += lambda * params.weight (biases untouched).
void addWeightDecay(LayerStack& grads, const LayerStack& params, double lambda);
/// sum over layers of ||W||_F^2 (biases excluded)
double weightNormSq(const LayerStack& layers) noexcept;
bool sameShape(const LayerStack& a, const LayerStack& b) noexcept;

/// Activations retained from one forward pass.
struct TapeCache {
  Matrix input;
  std::vector<Matrix> pre;   // z per layer
  std::vector<Matrix> post;  // activation(z) per layer; last entry is the output
  std::uint64_t paramsDigest = 0;
};

struct ForwardResult {
  Matrix outputs;
  TapeCache cache;
};

ForwardResult forward(const ModelParams& params, const Matrix& inputs);

/// Outputs only; skips building the tape.
Matrix evaluate(const ModelParams& params, const Matrix& inputs);

/// Jacobian-transpose product of the network at the cached point.
LayerStack backward(const ModelParams& params, const TapeCache& cache,
                    const Matrix& outputGrad);

struct JacobianPenalty {
  double value = 0.0;  // ||d phi / d x||_F^2
  LayerStack weightGrad;
};

/// Squared Frobenius norm of the input gradient of a scalar-output network,
/// and its exact gradient with respect to every weight and bias.
JacobianPenalty inputJacobianNormSq(const ModelParams& params, std::span<const double> input);

}  // namespace occ
