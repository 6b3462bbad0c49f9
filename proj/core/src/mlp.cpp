#include "occ/mlp.hpp"

#include <bit>
#include <cmath>

#include "occ/error.hpp"
#include "occ/rng.hpp"

namespace occ {

double Activation::apply(double z) const noexcept {
  switch (kind) {
    case ActivationKind::ReLU:
      return z > 0.0 ? z : 0.0;
    case ActivationKind::LeakyReLU:
      return z > 0.0 ? z : slope * z;
    case ActivationKind::Tanh:
      return std::tanh(z);
  }
  return z;
}

double Activation::derivative(double z) const noexcept {
  switch (kind) {
    case ActivationKind::ReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU:
      return z > 0.0 ? 1.0 : slope;
    case ActivationKind::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

double Activation::secondDerivative(double z) const noexcept {
  if (kind == ActivationKind::Tanh) {
    const double t = std::tanh(z);
    return -2.0 * t * (1.0 - t * t);
  }
  return 0.0;  // piecewise linear
}

std::string toString(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::LeakyReLU:
      return "leaky_relu";
    case ActivationKind::Tanh:
      return "tanh";
  }
  return "unknown";
}

ActivationKind parseActivationKind(const std::string& name) {
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "leaky_relu") return ActivationKind::LeakyReLU;
  if (name == "tanh") return ActivationKind::Tanh;
  throw ValidationError("unknown activation '" + name + "' (expected relu, leaky_relu, tanh)");
}

std::size_t ModelParams::inputDim() const {
  if (layers.empty()) throw ValidationError("model has no layers");
  return layers.front().weight.rows();
}

std::size_t ModelParams::outputDim() const {
  if (layers.empty()) throw ValidationError("model has no layers");
  return layers.back().weight.cols();
}

std::size_t ModelParams::parameterCount() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void ModelParams::validate() const {
  if (layers.empty()) throw ValidationError("model has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weight.rows() == 0 || l.weight.cols() == 0) {
      throw DimensionError("layer " + std::to_string(i) + " has an empty weight");
    }
    if (l.bias.size() != l.weight.cols()) {
      throw DimensionError("layer " + std::to_string(i) + " bias length " +
                           std::to_string(l.bias.size()) + " != fanOut " +
                           std::to_string(l.weight.cols()));
    }
    if (i + 1 < layers.size() && l.weight.cols() != layers[i + 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(i) + " output width " +
                           std::to_string(l.weight.cols()) + " != layer " +
                           std::to_string(i + 1) + " input width " +
                           std::to_string(layers[i + 1].weight.rows()));
    }
  }
}

ModelParams makeMlp(std::span<const std::size_t> dims, Activation activation,
                    std::uint64_t seed) {
  if (dims.size() < 2) throw ValidationError("an MLP needs at least input and output widths");
  for (std::size_t d : dims) {
    if (d == 0) throw ValidationError("MLP layer widths must be positive");
  }
  Rng rng(seed);
  ModelParams params;
  params.activation = activation;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fanIn = dims[i];
    const std::size_t fanOut = dims[i + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(fanIn + fanOut));
    LayerParams layer{Matrix(fanIn, fanOut), std::vector<double>(fanOut, 0.0)};
    for (double& w : layer.weight.values()) w = rng.uniform(-a, a);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ModelParams makeTwoHiddenLayerMlp(std::size_t inputDim, std::size_t hiddenDim,
                                  std::size_t outputDim, Activation activation,
                                  std::uint64_t seed) {
  const std::size_t dims[] = {inputDim, hiddenDim, hiddenDim, outputDim};
  return makeMlp(dims, activation, seed);
}

LayerStack zerosLike(const LayerStack& layers) {
  LayerStack out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Matrix(l.weight.rows(), l.weight.cols()),
                   std::vector<double>(l.bias.size(), 0.0)});
  }
  return out;
}

bool sameShape(const LayerStack& a, const LayerStack& b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].weight.rows() != b[i].weight.rows() || a[i].weight.cols() != b[i].weight.cols() ||
        a[i].bias.size() != b[i].bias.size()) {
      return false;
    }
  }
  return true;
}

void addScaled(LayerStack& dst, const LayerStack& src, double k) {
  if (!sameShape(dst, src)) throw DimensionError("addScaled: layer stacks differ in shape");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    auto d = dst[i].weight.values();
    auto s = src[i].weight.values();
    for (std::size_t j = 0; j < d.size(); ++j) d[j] += k * s[j];
    for (std::size_t j = 0; j < dst[i].bias.size(); ++j) dst[i].bias[j] += k * src[i].bias[j];
  }
}

void addWeightDecay(LayerStack& grads, const LayerStack& params, double lambda) {
  if (!sameShape(grads, params)) throw DimensionError("addWeightDecay: shape mismatch");
  if (lambda == 0.0) return;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto g = grads[i].weight.values();
    auto w = params[i].weight.values();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += lambda * w[j];
  }
}

double weightNormSq(const LayerStack& layers) noexcept {
  double acc = 0.0;
  for (const auto& l : layers) acc += frobeniusNormSq(l.weight);
  return acc;
}

namespace {

std::uint64_t digestOf(const ModelParams& params) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (const auto& l : params.layers) {
    mix(l.weight.rows());
    mix(l.weight.cols());
    for (double w : l.weight.values()) mix(std::bit_cast<std::uint64_t>(w));
    for (double b : l.bias) mix(std::bit_cast<std::uint64_t>(b));
  }
  return h;
}

void checkInputs(const ModelParams& params, const Matrix& inputs) {
  params.validate();
  if (inputs.rows() == 0) throw ValidationError("forward: empty batch");
  if (inputs.cols() != params.inputDim()) {
    throw DimensionError("forward: input width " + std::to_string(inputs.cols()) +
                         " != model input width " + std::to_string(params.inputDim()));
  }
  if (!inputs.allFinite()) throw ValidationError("forward: non-finite input");
}

Matrix affine(const Matrix& a, const LayerParams& layer) {
  Matrix z = matmul(a, layer.weight);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += layer.bias[j];
  }
  return z;
}

Matrix activate(const Matrix& z, const Activation& act) {
  Matrix a = z;
  for (double& v : a.values()) v = act.apply(v);
  return a;
}

}  // namespace

ForwardResult forward(const ModelParams& params, const Matrix& inputs) {
  checkInputs(params, inputs);
  ForwardResult result;
  TapeCache& cache = result.cache;
  cache.input = inputs;
  cache.paramsDigest = digestOf(params);
  const std::size_t depth = params.layers.size();
  cache.pre.reserve(depth);
  cache.post.reserve(depth);
  const Matrix* current = &cache.input;
  for (std::size_t l = 0; l < depth; ++l) {
    cache.pre.push_back(affine(*current, params.layers[l]));
    if (l + 1 < depth) {
      cache.post.push_back(activate(cache.pre.back(), params.activation));
    } else {
      cache.post.push_back(cache.pre.back());
    }
    current = &cache.post.back();
  }
  result.outputs = cache.post.back();
  return result;
}

Matrix evaluate(const ModelParams& params, const Matrix& inputs) {
  checkInputs(params, inputs);
  Matrix current = inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = affine(current, params.layers[l]);
    current = (l + 1 < params.layers.size()) ? activate(z, params.activation) : std::move(z);
  }
  return current;
}

LayerStack backward(const ModelParams& params, const TapeCache& cache, const Matrix& outputGrad) {
  const std::size_t depth = params.layers.size();
  if (cache.pre.size() != depth || cache.post.size() != depth) {
    throw ValidationError("backward: cache depth does not match the model");
  }
  if (cache.paramsDigest != digestOf(params)) {
    throw ValidationError("backward: cache was produced with different parameters");
  }
  const Matrix& out = cache.post.back();
  if (outputGrad.rows() != out.rows() || outputGrad.cols() != out.cols()) {
    throw DimensionError("backward: output gradient shape does not match the cached outputs");
  }

  LayerStack grads = zerosLike(params.layers);
  Matrix delta = outputGrad;
  for (std::size_t l = depth; l-- > 0;) {
    if (l + 1 < depth) {
      const Matrix& z = cache.pre[l];
      auto d = delta.values();
      auto zv = z.values();
      for (std::size_t j = 0; j < d.size(); ++j) d[j] *= params.activation.derivative(zv[j]);
    }
    const Matrix& prev = (l == 0) ? cache.input : cache.post[l - 1];
    grads[l].weight = matmulTransA(prev, delta);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) grads[l].bias[j] += r[j];
    }
    if (l > 0) delta = matmulTransB(delta, params.layers[l].weight);
  }
  return grads;
}

JacobianPenalty inputJacobianNormSq(const ModelParams& params, std::span<const double> input) {
  params.validate();
  if (params.outputDim() != 1) {
    throw UnsupportedConfigError("inputJacobianNormSq requires a scalar-output network, got " +
                                 std::to_string(params.outputDim()) + " outputs");
  }
  if (input.size() != params.inputDim()) {
    throw DimensionError("inputJacobianNormSq: input width mismatch");
  }
  const std::size_t depth = params.layers.size();
  const Activation& act = params.activation;

  // Forward pass, one sample.
  std::vector<std::vector<double>> z(depth), a(depth);
  std::vector<double> current(input.begin(), input.end());
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& layer = params.layers[l];
    std::vector<double> zl(layer.bias);
    for (std::size_t i = 0; i < layer.weight.rows(); ++i) {
      const double ai = current[i];
      auto wrow = layer.weight.row(i);
      for (std::size_t j = 0; j < zl.size(); ++j) zl[j] += ai * wrow[j];
    }
    std::vector<double> al(zl);
    if (l + 1 < depth) {
      for (double& v : al) v = act.apply(v);
    }
    z[l] = std::move(zl);
    a[l] = std::move(al);
    current = a[l];
  }

  // Input-gradient pass: g[l] = dphi/dz_l, h[l] = W_l g[l] = dphi/d(input of layer l).
  std::vector<std::vector<double>> g(depth), h(depth), s(depth);
  g[depth - 1] = {1.0};
  for (std::size_t l = depth; l-- > 0;) {
    const auto& w = params.layers[l].weight;
    std::vector<double> hl(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      auto wrow = w.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < wrow.size(); ++j) acc += wrow[j] * g[l][j];
      hl[i] = acc;
    }
    h[l] = std::move(hl);
    if (l > 0) {
      s[l - 1].resize(z[l - 1].size());
      g[l - 1].resize(z[l - 1].size());
      for (std::size_t j = 0; j < z[l - 1].size(); ++j) {
        s[l - 1][j] = act.derivative(z[l - 1][j]);
        g[l - 1][j] = s[l - 1][j] * h[l][j];
      }
    }
  }
  const std::vector<double>& jac = h[0];

  JacobianPenalty result;
  for (double v : jac) result.value += v * v;
  result.weightGrad = zerosLike(params.layers);

  // Reverse through the input-gradient pass, collecting direct adjoints on z.
  std::vector<std::vector<double>> zDirect(depth);
  std::vector<double> hbar(jac.size());
  for (std::size_t i = 0; i < jac.size(); ++i) hbar[i] = 2.0 * jac[i];
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& w = params.layers[l].weight;
    Matrix& wbar = result.weightGrad[l].weight;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      auto r = wbar.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) r[j] += hbar[i] * g[l][j];
    }
    if (l + 1 == depth) break;
    std::vector<double> gbar(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      auto wrow = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) gbar[j] += wrow[j] * hbar[i];
    }
    std::vector<double> nextHbar(w.cols());
    zDirect[l].resize(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      nextHbar[j] = s[l][j] * gbar[j];
      zDirect[l][j] = h[l + 1][j] * gbar[j] * act.secondDerivative(z[l][j]);
    }
    hbar = std::move(nextHbar);
  }

  // Reverse through the forward pass. The output pre-activation carries no
  // adjoint because the input gradient does not depend on it.
  if (depth >= 2) {
    std::vector<double> abar(z[depth - 2].size(), 0.0);
    for (std::size_t l = depth - 1; l-- > 0;) {
      std::vector<double> zbar(z[l].size());
      for (std::size_t j = 0; j < zbar.size(); ++j) {
        zbar[j] = zDirect[l][j] + act.derivative(z[l][j]) * abar[j];
      }
      const std::vector<double> prevA =
          (l == 0) ? std::vector<double>(input.begin(), input.end()) : a[l - 1];
      Matrix& wbar = result.weightGrad[l].weight;
      for (std::size_t i = 0; i < prevA.size(); ++i) {
        auto r = wbar.row(i);
        for (std::size_t j = 0; j < zbar.size(); ++j) r[j] += prevA[i] * zbar[j];
      }
      for (std::size_t j = 0; j < zbar.size(); ++j) result.weightGrad[l].bias[j] += zbar[j];
      if (l > 0) {
        const auto& w = params.layers[l].weight;
        std::vector<double> prevBar(w.rows(), 0.0);
        for (std::size_t i = 0; i < w.rows(); ++i) {
          auto wrow = w.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < wrow.size(); ++j) acc += wrow[j] * zbar[j];
          prevBar[i] = acc;
        }
        abar = std::move(prevBar);
      }
    }
  }
  return result;
}

}  // namespace occ
