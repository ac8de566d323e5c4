#include "jigsaw3d/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "jigsaw3d/errors.hpp"

namespace jigsaw3d {
namespace {

Layer init_layer(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Layer layer{Tensor2(fan_in, fan_out), Tensor2(1, fan_out)};
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
  return layer;
}

Layer zeros_like(const Layer& l) {
  return {Tensor2(l.weight.rows(), l.weight.cols()), Tensor2(1, l.bias.cols())};
}

void relu_inplace(Tensor2& t) {
  for (double& v : t.data()) v = v > 0.0 ? v : 0.0;
}

// dz = dh masked by (activation > 0).
void relu_backward_inplace(Tensor2& grad, const Tensor2& activation) {
  auto g = grad.data();
  auto a = activation.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

void add_column_sums(const Tensor2& t, Tensor2& bias_grad) {
  double* out = bias_grad.data().data();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    for (std::size_t c = 0; c < t.cols(); ++c) out[c] += row[c];
  }
}

std::vector<double> column_sums(const Tensor2& t) {
  std::vector<double> s(t.cols(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    for (std::size_t c = 0; c < t.cols(); ++c) s[c] += row[c];
  }
  return s;
}

Tensor2 cloud_matrix(const PointCloud& cloud) {
  Tensor2 x(cloud.size(), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    x(i, 0) = cloud[i].x;
    x(i, 1) = cloud[i].y;
    x(i, 2) = cloud[i].z;
  }
  return x;
}

void run_encoder(const Parameters& params, ForwardTrace& trace) {
  const Tensor2* h = &trace.input;
  trace.encoder.resize(params.encoder.size());
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    matmul(*h, params.encoder[l].weight, trace.encoder[l], &params.encoder[l].bias);
    relu_inplace(trace.encoder[l]);
    h = &trace.encoder[l];
  }
  const Tensor2& f = trace.encoder.back();
  trace.embedding.assign(f.cols(), 0.0);
  trace.argmax.assign(f.cols(), 0);
  auto first = f.row(0);
  std::copy(first.begin(), first.end(), trace.embedding.begin());
  for (std::size_t i = 1; i < f.rows(); ++i) {
    auto row = f.row(i);
    for (std::size_t c = 0; c < f.cols(); ++c) {
      if (row[c] > trace.embedding[c]) {
        trace.embedding[c] = row[c];
        trace.argmax[c] = i;
      }
    }
  }
}

void run_head(const Parameters& params, ForwardTrace& trace) {
  const auto embed = static_cast<std::size_t>(params.config.embed_dim);
  const Layer& first = params.head.front();
  const std::size_t width = first.weight.cols();
  const Tensor2& f = trace.encoder.back();
  const double* w = first.weight.data().data();

  // The global and conditioning blocks are identical for every point, so
  // they fold into one per-layer bias row.
  std::vector<double> shared(first.bias.data().begin(), first.bias.data().end());
  for (std::size_t c = 0; c < embed; ++c) {
    const double g = trace.embedding[c];
    const double* wrow = w + (embed + c) * width;
    for (std::size_t j = 0; j < width; ++j) shared[j] += g * wrow[j];
  }
  for (std::size_t c = 0; c < trace.condition.size(); ++c) {
    const double v = trace.condition[c];
    const double* wrow = w + (2 * embed + c) * width;
    for (std::size_t j = 0; j < width; ++j) shared[j] += v * wrow[j];
  }

  const std::size_t hidden = params.head.size() - 1;
  trace.head.resize(hidden);
  Tensor2 z(f.rows(), width);
  kernels::gemm(f.rows(), embed, width, f.data().data(), embed, w, width, z.data().data(), width,
                shared.data());
  if (hidden == 0) {
    trace.logits = std::move(z);
    return;
  }
  relu_inplace(z);
  trace.head[0] = std::move(z);
  for (std::size_t l = 1; l < params.head.size(); ++l) {
    Tensor2 out;
    matmul(trace.head[l - 1], params.head[l].weight, out, &params.head[l].bias);
    if (l < hidden) {
      relu_inplace(out);
      trace.head[l] = std::move(out);
    } else {
      trace.logits = std::move(out);
    }
  }
}

std::vector<double> run_classifier(const Layer& cls, std::span<const double> embedding) {
  std::vector<double> logits(cls.bias.data().begin(), cls.bias.data().end());
  const std::size_t m = cls.weight.cols();
  for (std::size_t c = 0; c < embedding.size(); ++c) {
    const double g = embedding[c];
    auto wrow = cls.weight.row(c);
    for (std::size_t j = 0; j < m; ++j) logits[j] += g * wrow[j];
  }
  return logits;
}

void check_condition(const Parameters& params, Condition condition) {
  require(condition.size() == static_cast<std::size_t>(params.config.condition_dim),
          "forward: condition length must equal condition_dim");
}

}  // namespace

void NetworkConfig::validate() const {
  auto positive = [](int v) { return v >= 1; };
  if (!std::all_of(encoder_widths.begin(), encoder_widths.end(), positive) ||
      !std::all_of(head_widths.begin(), head_widths.end(), positive) || embed_dim < 1) {
    throw ConfigError("network: all widths must be >= 1");
  }
  if (num_point_classes < 1) throw ConfigError("network.num_point_classes must be >= 1");
  if (condition_dim < 0) throw ConfigError("network.condition_dim must be >= 0");
}

std::vector<Parameters::NamedTensor> Parameters::tensors() {
  std::vector<NamedTensor> out;
  auto add = [&](const std::string& prefix, std::vector<Layer>& layers) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      out.push_back({prefix + "." + std::to_string(l) + ".weight", &layers[l].weight});
      out.push_back({prefix + "." + std::to_string(l) + ".bias", &layers[l].bias});
    }
  };
  add("encoder", encoder);
  add("head", head);
  if (classifier) {
    out.push_back({"classifier.weight", &classifier->weight});
    out.push_back({"classifier.bias", &classifier->bias});
  }
  return out;
}

std::vector<Parameters::ConstNamedTensor> Parameters::tensors() const {
  std::vector<ConstNamedTensor> out;
  for (auto& t : const_cast<Parameters*>(this)->tensors()) out.push_back({t.name, t.tensor});
  return out;
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  z.config = config;
  for (const auto& l : encoder) z.encoder.push_back(jigsaw3d::zeros_like(l));
  for (const auto& l : head) z.head.push_back(jigsaw3d::zeros_like(l));
  if (classifier) z.classifier = jigsaw3d::zeros_like(*classifier);
  return z;
}

std::size_t Parameters::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.tensor->size();
  return n;
}

bool Parameters::all_finite() const {
  const auto ts = tensors();
  return std::all_of(ts.begin(), ts.end(), [](const auto& t) { return t.tensor->all_finite(); });
}

int Parameters::num_object_classes() const {
  return classifier ? static_cast<int>(classifier->weight.cols()) : 0;
}

void Parameters::add_scaled(const Parameters& other, double scale) {
  auto mine = tensors();
  const auto theirs = other.tensors();
  require(mine.size() == theirs.size(), "Parameters::add_scaled: structure mismatch");
  for (std::size_t t = 0; t < mine.size(); ++t) {
    auto dst = mine[t].tensor->data();
    auto src = theirs[t].tensor->data();
    require(dst.size() == src.size(), "Parameters::add_scaled: shape mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
}

Parameters init_parameters(const NetworkConfig& cfg, Rng& rng) {
  cfg.validate();
  Parameters p;
  p.config = cfg;
  std::size_t in = 3;
  for (int w : cfg.encoder_widths) {
    p.encoder.push_back(init_layer(in, static_cast<std::size_t>(w), rng));
    in = static_cast<std::size_t>(w);
  }
  p.encoder.push_back(init_layer(in, static_cast<std::size_t>(cfg.embed_dim), rng));

  in = static_cast<std::size_t>(cfg.head_input_dim());
  for (int w : cfg.head_widths) {
    p.head.push_back(init_layer(in, static_cast<std::size_t>(w), rng));
    in = static_cast<std::size_t>(w);
  }
  p.head.push_back(init_layer(in, static_cast<std::size_t>(cfg.num_point_classes), rng));
  return p;
}

ForwardTrace forward_trace(const Parameters& params, const PointCloud& cloud,
                           Condition condition, bool with_head, bool with_classifier) {
  if (with_head) check_condition(params, condition);
  require(!with_classifier || params.classifier.has_value(),
          "forward_trace: no classifier attached");
  ForwardTrace trace;
  trace.input = cloud_matrix(cloud);
  run_encoder(params, trace);
  if (with_head) {
    trace.condition.assign(condition.begin(), condition.end());
    run_head(params, trace);
  }
  if (with_classifier) trace.class_logits = run_classifier(*params.classifier, trace.embedding);
  return trace;
}

ForwardOutput forward(const Parameters& params, const PointCloud& cloud, Condition condition) {
  ForwardTrace t = forward_trace(params, cloud, condition, true, false);
  return {std::move(t.logits), std::move(t.embedding), std::move(t.argmax)};
}

std::vector<double> extract_embedding(const Parameters& params, const PointCloud& cloud) {
  ForwardTrace trace;
  trace.input = cloud_matrix(cloud);
  run_encoder(params, trace);
  return std::move(trace.embedding);
}

std::vector<double> classify(const Parameters& params, const PointCloud& cloud) {
  require(params.classifier.has_value(), "classify: no classifier attached");
  return run_classifier(*params.classifier, extract_embedding(params, cloud));
}

void backward(const Parameters& params, const ForwardTrace& trace, const Tensor2* logit_grads,
              std::span<const double> class_logit_grads, Parameters& grads) {
  const auto embed = static_cast<std::size_t>(params.config.embed_dim);
  const Tensor2& f = trace.encoder.back();
  const std::size_t n = f.rows();
  std::vector<double> d_embedding(embed, 0.0);
  Tensor2 d_features(n, embed);

  if (logit_grads != nullptr) {
    require(!trace.logits.data().empty(), "backward: forward pass skipped the head");
    require(logit_grads->rows() == n && logit_grads->cols() == trace.logits.cols(),
            "backward: upstream gradient shape mismatch");
    Tensor2 dz = *logit_grads;
    for (std::size_t l = params.head.size(); l-- > 1;) {
      const Tensor2& h_in = trace.head[l - 1];
      matmul_at_b_add(h_in, dz, grads.head[l].weight);
      add_column_sums(dz, grads.head[l].bias);
      Tensor2 dh;
      matmul(dz, params.head[l].weight.transposed(), dh);
      relu_backward_inplace(dh, h_in);
      dz = std::move(dh);
    }
    // First head layer: input is [f_i, g, condition].
    const Layer& first = params.head.front();
    Layer& gfirst = grads.head.front();
    const std::size_t width = first.weight.cols();
    double* gw = gfirst.weight.data().data();
    kernels::gemm_at_b_add(n, embed, width, f.data().data(), embed, dz.data().data(), width, gw,
                           width);
    const std::vector<double> dz_sum = column_sums(dz);
    for (std::size_t j = 0; j < width; ++j) gfirst.bias(0, j) += dz_sum[j];
    for (std::size_t c = 0; c < embed; ++c) {
      const double g = trace.embedding[c];
      double* row = gw + (embed + c) * width;
      for (std::size_t j = 0; j < width; ++j) row[j] += g * dz_sum[j];
    }
    for (std::size_t c = 0; c < trace.condition.size(); ++c) {
      const double v = trace.condition[c];
      double* row = gw + (2 * embed + c) * width;
      for (std::size_t j = 0; j < width; ++j) row[j] += v * dz_sum[j];
    }
    // d f_i from the local block, d g from the global block.
    const Tensor2 wt = first.weight.transposed();  // width x in
    kernels::gemm(n, width, embed, dz.data().data(), width, wt.data().data(), wt.cols(),
                  d_features.data().data(), embed, nullptr);
    const double* w = first.weight.data().data();
    for (std::size_t c = 0; c < embed; ++c) {
      const double* wrow = w + (embed + c) * width;
      double s = 0.0;
      for (std::size_t j = 0; j < width; ++j) s += wrow[j] * dz_sum[j];
      d_embedding[c] += s;
    }
  }

  if (!class_logit_grads.empty()) {
    require(params.classifier.has_value() && grads.classifier.has_value(),
            "backward: classifier gradient without classifier");
    const Layer& cls = *params.classifier;
    Layer& gcls = *grads.classifier;
    const std::size_t m = cls.weight.cols();
    require(class_logit_grads.size() == m, "backward: class gradient size mismatch");
    for (std::size_t c = 0; c < embed; ++c) {
      const double g = trace.embedding[c];
      auto grow = gcls.weight.row(c);
      auto wrow = cls.weight.row(c);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        grow[j] += g * class_logit_grads[j];
        s += wrow[j] * class_logit_grads[j];
      }
      d_embedding[c] += s;
    }
    for (std::size_t j = 0; j < m; ++j) gcls.bias(0, j) += class_logit_grads[j];
  }

  // Max-pool routes each channel's gradient to its single winner.
  for (std::size_t c = 0; c < embed; ++c) d_features(trace.argmax[c], c) += d_embedding[c];

  Tensor2 dz = std::move(d_features);
  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    relu_backward_inplace(dz, trace.encoder[l]);
    const Tensor2& h_in = l == 0 ? trace.input : trace.encoder[l - 1];
    matmul_at_b_add(h_in, dz, grads.encoder[l].weight);
    add_column_sums(dz, grads.encoder[l].bias);
    if (l == 0) break;
    Tensor2 dh;
    matmul(dz, params.encoder[l].weight.transposed(), dh);
    dz = std::move(dh);
  }
}

Parameters backward(const Parameters& params, const PointCloud& cloud, Condition condition,
                    const Tensor2& upstream_logit_grads) {
  const ForwardTrace trace = forward_trace(params, cloud, condition, true, false);
  Parameters grads = params.zeros_like();
  backward(params, trace, &upstream_logit_grads, {}, grads);
  return grads;
}

Parameters swap_head(const Parameters& params, int new_num_point_classes, Rng& rng,
                     std::optional<int> new_condition_dim) {
  NetworkConfig cfg = params.config;
  cfg.num_point_classes = new_num_point_classes;
  if (new_condition_dim) cfg.condition_dim = *new_condition_dim;
  cfg.validate();
  Parameters out;
  out.config = cfg;
  out.encoder = params.encoder;
  std::size_t in = static_cast<std::size_t>(cfg.head_input_dim());
  for (int w : cfg.head_widths) {
    out.head.push_back(init_layer(in, static_cast<std::size_t>(w), rng));
    in = static_cast<std::size_t>(w);
  }
  out.head.push_back(init_layer(in, static_cast<std::size_t>(cfg.num_point_classes), rng));
  return out;
}

Parameters attach_classifier(const Parameters& params, int num_classes, Rng& rng) {
  require(num_classes >= 1, "attach_classifier: num_classes must be >= 1");
  Parameters out = params;
  out.classifier = init_layer(static_cast<std::size_t>(params.config.embed_dim),
                              static_cast<std::size_t>(num_classes), rng);
  return out;
}

std::vector<double> one_hot(int index, int dim) {
  require(index >= 0 && index < dim, "one_hot: index out of range");
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(index)] = 1.0;
  return v;
}

std::uint64_t checksum(const Parameters& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& t : params.tensors()) {
    mix(t.name.data(), t.name.size());
    const std::size_t shape[2] = {t.tensor->rows(), t.tensor->cols()};
    mix(shape, sizeof(shape));
    mix(t.tensor->data().data(), t.tensor->size() * sizeof(double));
  }
  return h;
}

}  // namespace jigsaw3d
