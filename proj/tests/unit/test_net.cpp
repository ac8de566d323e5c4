#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/loss.hpp"
#include "jigsaw3d/net.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/tensor.hpp"
#include "oracles.hpp"

using namespace jigsaw3d;

namespace {

PointCloud permuted(const PointCloud& c, const std::vector<std::size_t>& order) {
  std::vector<Point3> pts;
  for (std::size_t i : order) pts.push_back(c[i]);
  return PointCloud(std::move(pts));
}

// Encoder output of a single point, recomputed layer by layer.
std::vector<double> encode_point(const Parameters& p, Point3 x) {
  std::vector<double> h{x.x, x.y, x.z};
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const Layer& layer = p.encoder[l];
    std::vector<double> out(layer.weight.cols());
    for (std::size_t j = 0; j < out.size(); ++j) {
      double s = layer.bias(0, j);
      for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * layer.weight(i, j);
      out[j] = std::max(0.0, s);
    }
    h = std::move(out);
  }
  return h;
}

}  // namespace

TEST(Tensor, MatmulMatchesNaiveProduct) {
  Rng rng(1);
  Tensor2 a(7, 5), b(5, 4), bias(1, 4);
  for (double& v : a.data()) v = rng.gaussian();
  for (double& v : b.data()) v = rng.gaussian();
  for (double& v : bias.data()) v = rng.gaussian();
  Tensor2 out;
  matmul(a, b, out, &bias);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = bias(0, j);
      for (std::size_t k = 0; k < 5; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(out(i, j), s, 1e-12);
    }
  }
  Tensor2 acc(5, 4, 0.0);
  Tensor2 c(7, 4);
  for (double& v : c.data()) v = rng.gaussian();
  matmul_at_b_add(a, c, acc);
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < 7; ++i) s += a(i, k) * c(i, j);
      EXPECT_NEAR(acc(k, j), s, 1e-12);
    }
  }
}

TEST(Init, DeterministicAndBounded) {
  const NetworkConfig cfg;
  Rng a(3), b(3);
  const Parameters p = init_parameters(cfg, a);
  EXPECT_EQ(p, init_parameters(cfg, b));
  for (const auto& layer : p.encoder) {
    const double s = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (double w : layer.weight.data()) ASSERT_LE(std::abs(w), s);
    for (double v : layer.bias.data()) ASSERT_EQ(v, 0.0);
  }
  EXPECT_EQ(p.encoder.size(), cfg.encoder_widths.size() + 1);
  EXPECT_EQ(p.head.size(), cfg.head_widths.size() + 1);
  EXPECT_EQ(p.head.front().weight.rows(), static_cast<std::size_t>(cfg.head_input_dim()));
  EXPECT_EQ(p.head.back().weight.cols(), 27u);
}

TEST(Init, WeightMeanNearZero) {
  NetworkConfig cfg;
  cfg.encoder_widths = {300};
  cfg.embed_dim = 300;
  Rng rng(4);
  const Parameters p = init_parameters(cfg, rng);
  const Tensor2& w = p.encoder[1].weight;  // 300 x 300 = 9e4 samples
  double s = 0;
  for (double v : w.data()) s += v;
  const double bound = std::sqrt(6.0 / 600.0);
  const double sigma = bound / std::sqrt(3.0) / std::sqrt(static_cast<double>(w.size()));
  EXPECT_LT(std::abs(s / static_cast<double>(w.size())), 5 * sigma);
}

TEST(NetworkConfig, Validation) {
  NetworkConfig c;
  EXPECT_NO_THROW(c.validate());
  c.encoder_widths = {0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetworkConfig{};
  c.num_point_classes = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Forward, PermutationInvariantEmbeddingEquivariantLogits) {
  Rng rng(5);
  Parameters p = init_parameters(fixtures::small_net(8), rng);
  for (int t = 0; t < 5; ++t) {
    const PointCloud c = fixtures::random_cloud(rng, 40, 0, 1);
    const ForwardOutput base = forward(p, c);
    for (int r = 0; r < 20; ++r) {
      const auto order = fixtures::random_order(rng, c.size());
      const ForwardOutput out = forward(p, permuted(c, order));
      ASSERT_EQ(out.embedding, base.embedding);
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = 0; j < 8; ++j) ASSERT_EQ(out.logits(i, j), base.logits(order[i], j));
      }
    }
  }
}

TEST(Forward, ZeroWeightsGiveZeroOutput) {
  Rng rng(6);
  Parameters p = init_parameters(fixtures::small_net(5), rng).zeros_like();
  const ForwardOutput out = forward(p, fixtures::random_cloud(rng, 10));
  for (double v : out.logits.data()) EXPECT_EQ(v, 0.0);
  for (double v : out.embedding) EXPECT_EQ(v, 0.0);
}

TEST(Forward, SinglePointEmbeddingIsEncoderOutput) {
  Rng rng(7);
  const Parameters p = init_parameters(fixtures::small_net(), rng);
  const Point3 x{0.3, 0.7, 0.1};
  const auto e = extract_embedding(p, PointCloud({x}));
  const auto ref = encode_point(p, x);
  ASSERT_EQ(e.size(), ref.size());
  for (std::size_t c = 0; c < e.size(); ++c) EXPECT_NEAR(e[c], ref[c], 1e-14);
}

TEST(Forward, EmbeddingIsChannelwiseMaxOfPointFeatures) {
  Rng rng(8);
  const Parameters p = init_parameters(fixtures::small_net(), rng);
  const PointCloud c = fixtures::random_cloud(rng, 30, 0, 1);
  const ForwardOutput out = forward(p, c);
  for (std::size_t ch = 0; ch < out.embedding.size(); ++ch) {
    double m = -1e300;
    for (const auto& x : c) m = std::max(m, encode_point(p, x)[ch]);
    EXPECT_NEAR(out.embedding[ch], m, 1e-14);
  }
}

TEST(Forward, ConditionLengthChecked) {
  Rng rng(9);
  const Parameters p = init_parameters(fixtures::small_net(4, 3), rng);
  const PointCloud c = fixtures::random_cloud(rng, 5);
  const std::vector<double> good = one_hot(1, 3);
  EXPECT_NO_THROW(forward(p, c, good));
  const std::vector<double> bad = one_hot(1, 2);
  EXPECT_THROW(forward(p, c, bad), ContractViolation);
}

TEST(ExtractEmbedding, MatchesForwardAndIsIdempotentUnderDuplication) {
  Rng rng(10);
  const Parameters p = init_parameters(fixtures::small_net(), rng);
  const PointCloud c = fixtures::random_cloud(rng, 25);
  const auto e = extract_embedding(p, c);
  EXPECT_EQ(e, forward(p, c).embedding);
  std::vector<Point3> twice(c.begin(), c.end());
  twice.insert(twice.end(), c.begin(), c.end());
  EXPECT_EQ(extract_embedding(p, PointCloud(twice)), e);
  EXPECT_EQ(extract_embedding(p, permuted(c, fixtures::random_order(rng, c.size()))), e);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(11);
  const Parameters p = init_parameters(fixtures::small_net(), rng);
  const PointCloud c = fixtures::random_cloud(rng, 12);
  const Parameters g = backward(p, c, {}, Tensor2(12, 8, 0.0));
  EXPECT_EQ(g, p.zeros_like());
}

TEST(Backward, MatchesFiniteDifferences) {
  // Widths [8,8], embed 16, k = 2 (8 classes), 16 points; conditioning and
  // a classifier make every parameter group reachable.
  Rng rng(12);
  Parameters p = init_parameters(fixtures::small_net(8, 2), rng);
  p = attach_classifier(p, 3, rng);
  const PointCloud c = fixtures::random_cloud(rng, 16, 0, 1);
  std::vector<int> targets(16);
  for (int& t : targets) t = static_cast<int>(rng.uniform_int(8));
  const std::vector<double> cond = one_hot(1, 2);
  const int label = 2;
  auto loss = [&](const Parameters& q) {
    const ForwardTrace tr = forward_trace(q, c, cond, true, true);
    Tensor2 cl(1, 3);
    for (std::size_t j = 0; j < 3; ++j) cl(0, j) = tr.class_logits[j];
    return cross_entropy_per_point(tr.logits, targets).loss +
           cross_entropy_per_point(cl, std::span<const int>(&label, 1)).loss;
  };
  const ForwardTrace tr = forward_trace(p, c, cond, true, true);
  const LossAndGrad lg = cross_entropy_per_point(tr.logits, targets);
  Tensor2 cl(1, 3);
  for (std::size_t j = 0; j < 3; ++j) cl(0, j) = tr.class_logits[j];
  const LossAndGrad lc = cross_entropy_per_point(cl, std::span<const int>(&label, 1));
  Parameters g = p.zeros_like();
  backward(p, tr, &lg.grad, lc.grad.row(0), g);

  const Parameters fd = oracle::finite_difference(p, loss, 1e-5);
  const auto ga = g.tensors();
  const auto gf = fd.tensors();
  for (std::size_t t = 0; t < ga.size(); ++t) {
    double worst = 0;
    for (std::size_t i = 0; i < ga[t].tensor->size(); ++i) {
      worst = std::max(worst, oracle::relative_error(ga[t].tensor->data()[i],
                                                     gf[t].tensor->data()[i]));
    }
    EXPECT_LT(worst, 1e-4) << ga[t].name;
  }
}

TEST(Backward, DuplicatingANonWinningPointLeavesGradientsUnchanged) {
  Rng rng(13);
  const Parameters p = init_parameters(fixtures::small_net(4), rng);
  const PointCloud c = fixtures::random_cloud(rng, 20, 0, 1);
  const ForwardOutput out = forward(p, c);
  std::vector<char> wins(c.size(), 0);
  for (std::size_t a : out.argmax) wins[a] = 1;
  std::size_t loser = c.size();
  for (std::size_t i = c.size(); i-- > 0;) {
    if (!wins[i]) {
      loser = i;
      break;
    }
  }
  ASSERT_LT(loser, c.size());

  // Upstream only on the original points; the duplicate gets zero, so any
  // change in the gradient would have to come through the max-pool.
  Tensor2 up(c.size(), 4);
  for (double& v : up.data()) v = rng.gaussian();
  std::vector<Point3> pts(c.begin(), c.end());
  pts.push_back(c[loser]);
  Tensor2 up2(c.size() + 1, 4, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) up2(i, j) = up(i, j);
  }
  const Parameters g1 = backward(p, c, {}, up);
  const Parameters g2 = backward(p, PointCloud(pts), {}, up2);
  const auto t1 = g1.tensors();
  const auto t2 = g2.tensors();
  for (std::size_t t = 0; t < t1.size(); ++t) {
    for (std::size_t i = 0; i < t1[t].tensor->size(); ++i) {
      EXPECT_NEAR(t1[t].tensor->data()[i], t2[t].tensor->data()[i], 1e-13) << t1[t].name;
    }
  }
  // Embedding-level routing is indifferent to the duplicate as well.
  EXPECT_EQ(forward(p, PointCloud(pts)).argmax, out.argmax);
}

TEST(SwapHead, KeepsEncoderReplacesHead) {
  Rng rng(14);
  const Parameters p = init_parameters(fixtures::small_net(8), rng);
  Rng r2(15);
  const Parameters q = swap_head(p, 8, r2);
  EXPECT_EQ(q.encoder, p.encoder);
  EXPECT_NE(q.head, p.head);
  const PointCloud c = fixtures::random_cloud(rng, 30);
  EXPECT_EQ(extract_embedding(q, c), extract_embedding(p, c));

  const Parameters r = swap_head(p, 5, r2, 2);
  const std::vector<double> cond = one_hot(0, 2);
  EXPECT_EQ(forward(r, c, cond).logits.cols(), 5u);
  EXPECT_EQ(r.config.num_point_classes, 5);
  EXPECT_EQ(extract_embedding(r, c), extract_embedding(p, c));
}

TEST(Classifier, AttachAndClassify) {
  Rng rng(16);
  Parameters p = init_parameters(fixtures::small_net(), rng);
  const PointCloud c = fixtures::random_cloud(rng, 10);
  EXPECT_THROW(classify(p, c), ContractViolation);
  p = attach_classifier(p, 4, rng);
  EXPECT_EQ(p.num_object_classes(), 4);
  EXPECT_EQ(classify(p, c).size(), 4u);
  EXPECT_FALSE(swap_head(p, 3, rng).classifier.has_value());
}

TEST(Checksum, ChangesWithAnyScalar) {
  Rng rng(17);
  Parameters p = init_parameters(fixtures::small_net(), rng);
  const auto before = checksum(p);
  EXPECT_EQ(before, checksum(p));
  p.head.back().bias(0, 0) += 1e-300;
  EXPECT_NE(before, checksum(p));
}
