#include "sideslip/mlp/mlp.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "sideslip/kernels/kernels.hpp"
#include "sideslip/rng.hpp"

namespace sideslip::mlp {

const char* to_string(ConcatPoint c) {
  return c == ConcatPoint::Stage2 ? "stage2" : "stage1_input";
}

ConcatPoint concat_point_from_string(const std::string& s) {
  if (s == "stage2") return ConcatPoint::Stage2;
  if (s == "stage1_input") return ConcatPoint::Stage1Input;
  throw ConfigError("unknown concat point '" + s + "'");
}

MlpTopology MlpTopology::standard(std::size_t feature_dim, ConcatPoint concat) {
  MlpTopology t;
  t.concat_point = concat;
  const std::size_t stage1_in =
      concat == ConcatPoint::Stage2 ? feature_dim : feature_dim + 1;
  t.stage1_sizes = {stage1_in, 16, 32, 64, 128};
  const std::size_t stage2_in = concat == ConcatPoint::Stage2 ? 129 : 128;
  t.stage2_sizes = {stage2_in, 32, 16, 1};
  return t;
}

std::vector<MlpTopology::LayerShape> MlpTopology::layers() const {
  validate();
  std::vector<LayerShape> shapes;
  for (std::size_t i = 1; i < stage1_sizes.size(); ++i) {
    shapes.push_back({stage1_sizes[i], stage1_sizes[i - 1], true});
  }
  for (std::size_t i = 1; i < stage2_sizes.size(); ++i) {
    const bool last = i + 1 == stage2_sizes.size();
    shapes.push_back({stage2_sizes[i], stage2_sizes[i - 1], !last});
  }
  return shapes;
}

std::size_t MlpTopology::layer_count() const {
  return stage1_sizes.size() - 1 + stage2_sizes.size() - 1;
}

void MlpTopology::validate() const {
  if (stage1_sizes.size() < 2 || stage2_sizes.size() < 2) {
    throw ShapeError("topology: each stage needs an input and a layer");
  }
  for (auto v : stage1_sizes) {
    if (v == 0) throw ShapeError("topology: zero width in stage 1");
  }
  for (auto v : stage2_sizes) {
    if (v == 0) throw ShapeError("topology: zero width in stage 2");
  }
  const std::size_t expected =
      concat_point == ConcatPoint::Stage2 ? stage1_sizes.back() + 1
                                          : stage1_sizes.back();
  if (stage2_sizes.front() != expected) {
    throw ShapeError("topology: stage-2 input width must be " +
                     std::to_string(expected));
  }
  if (concat_point == ConcatPoint::Stage1Input && stage1_sizes.front() < 2) {
    throw ShapeError("topology: stage-1 input must include the prior");
  }
}

bool MlpWeights::all_finite() const {
  for (const auto& layer : layers) {
    for (double v : layer.w) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : layer.b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

MlpWeights xavier_init(const MlpTopology& topology, std::uint64_t seed) {
  Rng rng(seed);
  MlpWeights weights;
  for (const auto& shape : topology.layers()) {
    LayerWeights layer;
    const double bound =
        std::sqrt(6.0 / static_cast<double>(shape.in + shape.out));
    layer.w.resize(shape.out * shape.in);
    for (auto& v : layer.w) v = rng.uniform(-bound, bound);
    layer.b.assign(shape.out, 0.0);
    weights.layers.push_back(std::move(layer));
  }
  return weights;
}

MlpWeights zero_weights(const MlpTopology& topology) {
  MlpWeights weights;
  for (const auto& shape : topology.layers()) {
    LayerWeights layer;
    layer.w.assign(shape.out * shape.in, 0.0);
    layer.b.assign(shape.out, 0.0);
    weights.layers.push_back(std::move(layer));
  }
  return weights;
}

namespace {

void check_weights_match(const MlpWeights& weights,
                         const std::vector<MlpTopology::LayerShape>& shapes) {
  if (weights.layers.size() != shapes.size()) {
    throw ShapeError("network: layer count does not match topology");
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (weights.layers[l].w.size() != shapes[l].out * shapes[l].in ||
        weights.layers[l].b.size() != shapes[l].out) {
      throw ShapeError("network: layer " + std::to_string(l) +
                       " weight shape does not match topology");
    }
  }
}

// z = x * w^T + b for a row-major (out x in) weight matrix; the transpose
// scratch keeps the kernel contraction in-order over the input dimension.
void affine_forward(const LayerWeights& layer, std::size_t out, std::size_t in,
                    const double* x, std::size_t batch, double* z,
                    std::vector<double>& wt_scratch) {
  wt_scratch.resize(in * out);
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t i = 0; i < in; ++i) {
      wt_scratch[i * out + o] = layer.w[o * in + i];
    }
  }
  const auto& ops = kernels::active();
  ops.matmul_nn(z, x, wt_scratch.data(), batch, in, out);
  ops.add_rowvec(z, layer.b.data(), batch, out);
}

}  // namespace

void forward(const MlpWeights& weights, const MlpTopology& topology,
             std::span<const double> features, std::span<const double> prior,
             std::size_t batch, ForwardCache& cache,
             std::vector<double>& beta_hat) {
  const auto shapes = topology.layers();
  check_weights_match(weights, shapes);
  const std::size_t fd = topology.feature_dim();
  if (features.size() != batch * fd) {
    throw ShapeError("forward: feature matrix size mismatch");
  }
  if (prior.size() != batch) {
    throw ShapeError("forward: prior vector size mismatch");
  }

  cache.batch = batch;
  cache.inputs.resize(shapes.size());
  cache.activations.resize(shapes.size());

  // Stage-1 input, with the prior as an extra trailing column when it enters
  // at the raw input.
  {
    auto& in0 = cache.inputs[0];
    if (topology.concat_point == ConcatPoint::Stage1Input) {
      in0.resize(batch * (fd + 1));
      for (std::size_t s = 0; s < batch; ++s) {
        std::memcpy(in0.data() + s * (fd + 1), features.data() + s * fd,
                    fd * sizeof(double));
        in0[s * (fd + 1) + fd] = prior[s];
      }
    } else {
      in0.assign(features.begin(), features.end());
    }
  }

  static thread_local std::vector<double> wt_scratch;
  const auto& ops = kernels::active();
  const std::size_t stage2_first = topology.stage2_first_layer();

  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (l > 0) {
      const auto& prev = cache.activations[l - 1];
      auto& in = cache.inputs[l];
      if (l == stage2_first && topology.concat_point == ConcatPoint::Stage2) {
        const std::size_t width = shapes[l].in;
        in.resize(batch * width);
        for (std::size_t s = 0; s < batch; ++s) {
          std::memcpy(in.data() + s * width, prev.data() + s * (width - 1),
                      (width - 1) * sizeof(double));
          in[s * width + width - 1] = prior[s];
        }
      } else {
        in = prev;
      }
    }
    auto& act = cache.activations[l];
    act.resize(batch * shapes[l].out);
    affine_forward(weights.layers[l], shapes[l].out, shapes[l].in,
                   cache.inputs[l].data(), batch, act.data(), wt_scratch);
    if (shapes[l].tanh) {
      ops.vtanh(act.data(), act.data(), act.size());
    }
  }

  const auto& final_act = cache.activations.back();
  if (shapes.back().out != 1) {
    throw ShapeError("forward: final layer must have a single output");
  }
  beta_hat.assign(final_act.begin(), final_act.end());
}

double forward_one(const MlpWeights& weights, const MlpTopology& topology,
                   std::span<const double> features, double prior) {
  static thread_local ForwardCache cache;
  static thread_local std::vector<double> beta_hat;
  forward(weights, topology, features, std::span<const double>(&prior, 1), 1,
          cache, beta_hat);
  return beta_hat[0];
}

double loss(std::span<const double> beta_hat, std::span<const double> beta_ref,
            const MlpWeights& weights, double l2_rate) {
  if (beta_hat.size() != beta_ref.size()) {
    throw ShapeError("loss: batch length mismatch");
  }
  if (beta_hat.empty()) throw ShapeError("loss: empty batch");
  const auto& ops = kernels::active();
  std::vector<double> diff(beta_hat.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = beta_hat[i] - beta_ref[i];
  }
  double value = ops.sum_sq(diff.data(), diff.size()) /
                 static_cast<double>(diff.size());
  for (const auto& layer : weights.layers) {
    value += l2_rate * ops.sum_sq(layer.w.data(), layer.w.size());
  }
  return value;
}

MlpGradients backward(const MlpWeights& weights, const MlpTopology& topology,
                      const ForwardCache& cache,
                      std::span<const double> beta_ref, double l2_rate) {
  const auto shapes = topology.layers();
  check_weights_match(weights, shapes);
  const std::size_t batch = cache.batch;
  if (beta_ref.size() != batch) {
    throw ShapeError("backward: reference batch length mismatch");
  }
  if (cache.inputs.size() != shapes.size() ||
      cache.activations.size() != shapes.size()) {
    throw ShapeError("backward: cache does not match topology");
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (cache.inputs[l].size() != batch * shapes[l].in ||
        cache.activations[l].size() != batch * shapes[l].out) {
      throw ShapeError("backward: cache shape mismatch at layer " +
                       std::to_string(l));
    }
  }

  const auto& ops = kernels::active();
  MlpGradients grads = zero_weights(topology);
  const std::size_t stage2_first = topology.stage2_first_layer();

  // d(mse)/d(beta_hat) = 2 (beta_hat - beta_ref) / batch.
  std::vector<double> delta(batch);
  const auto& beta_hat = cache.activations.back();
  const double scale = 2.0 / static_cast<double>(batch);
  for (std::size_t s = 0; s < batch; ++s) {
    delta[s] = scale * (beta_hat[s] - beta_ref[s]);
  }

  std::vector<double> dinput;
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const std::size_t out = shapes[l].out;
    const std::size_t in = shapes[l].in;
    auto& g = grads.layers[l];
    ops.matmul_tn(g.w.data(), delta.data(), cache.inputs[l].data(), batch, out,
                  in);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* drow = delta.data() + s * out;
      for (std::size_t o = 0; o < out; ++o) g.b[o] += drow[o];
    }
    if (l == 0) break;

    dinput.resize(batch * in);
    ops.matmul_nn(dinput.data(), delta.data(), weights.layers[l].w.data(),
                  batch, out, in);

    // Map the input gradient onto the previous layer's activation gradient,
    // dropping the prior column if it was concatenated here.
    const std::size_t prev_out = shapes[l - 1].out;
    delta.resize(batch * prev_out);
    if (l == stage2_first && topology.concat_point == ConcatPoint::Stage2) {
      for (std::size_t s = 0; s < batch; ++s) {
        std::memcpy(delta.data() + s * prev_out, dinput.data() + s * in,
                    prev_out * sizeof(double));
      }
    } else {
      delta.assign(dinput.begin(), dinput.end());
    }
    ops.tanh_grad_mul(delta.data(), delta.data(),
                      cache.activations[l - 1].data(), delta.size());
  }

  if (l2_rate != 0.0) {
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      ops.axpy(2.0 * l2_rate, weights.layers[l].w.data(),
               grads.layers[l].w.data(), grads.layers[l].w.size());
    }
  }
  return grads;
}

}  // namespace sideslip::mlp
