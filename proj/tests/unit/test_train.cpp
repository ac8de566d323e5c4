#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/loss.hpp"
#include "jigsaw3d/optim.hpp"
#include "jigsaw3d/synth.hpp"
#include "jigsaw3d/train.hpp"
#include "oracles.hpp"

using namespace jigsaw3d;

namespace {

Dataset tiny_synth(std::size_t per_class, std::size_t points, std::uint64_t seed = 3) {
  SynthSpec s;
  s.per_class_count = per_class;
  s.points_per_cloud = points;
  s.seed = seed;
  return synthesize_dataset(s);
}

NetworkConfig desk_net(int classes) {
  NetworkConfig n;
  n.encoder_widths = {16, 32};
  n.embed_dim = 32;
  n.head_widths = {32};
  n.num_point_classes = classes;
  return n;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const Tensor2 z(4, 27, 0.0);
  const std::vector<int> t{0, 5, 26, 13};
  EXPECT_NEAR(cross_entropy_per_point(z, t).loss, std::log(27.0), 1e-15);
}

TEST(CrossEntropy, SaturatedCorrectIsZero) {
  Tensor2 z(3, 5, 0.0);
  const std::vector<int> t{1, 4, 0};
  for (std::size_t i = 0; i < 3; ++i) z(i, static_cast<std::size_t>(t[i])) = 1000.0;
  const LossAndGrad lg = cross_entropy_per_point(z, t);
  EXPECT_NEAR(lg.loss, 0.0, 1e-300);
  EXPECT_TRUE(lg.grad.all_finite());
}

TEST(CrossEntropy, MatchesHighPrecisionOracleAndFiniteDifferences) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor2 z(5, 4);
    for (double& v : z.data()) v = 3.0 * rng.gaussian();
    std::vector<int> t(5);
    for (int& v : t) v = static_cast<int>(rng.uniform_int(4));
    const LossAndGrad lg = cross_entropy_per_point(z, t);
    EXPECT_NEAR(lg.loss, static_cast<double>(oracle::cross_entropy(z, t)), 1e-12);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        Tensor2 up = z, down = z;
        up(i, j) += 1e-6;
        down(i, j) -= 1e-6;
        const double fd = (cross_entropy_per_point(up, t).loss -
                           cross_entropy_per_point(down, t).loss) / 2e-6;
        EXPECT_NEAR(lg.grad(i, j), fd, 1e-6);
      }
    }
  }
}

TEST(CrossEntropy, OutOfRangeTargetRejected) {
  const Tensor2 z(1, 3, 0.0);
  const std::vector<int> t{3};
  EXPECT_THROW(cross_entropy_per_point(z, t), ContractViolation);
}

TEST(Adam, ZeroGradientsFromZeroStateAreAFixedPoint) {
  Rng rng(2);
  Parameters p = init_parameters(fixtures::small_net(), rng);
  const Parameters before = p;
  AdamState st = AdamState::for_parameters(p);
  adam_step(p, p.zeros_like(), st, AdamOptions{});
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ZeroLearningRateNeverMoves) {
  Rng rng(3);
  Parameters p = init_parameters(fixtures::small_net(), rng);
  const Parameters before = p;
  Parameters g = p;  // arbitrary non-zero gradient
  AdamState st = AdamState::for_parameters(p);
  AdamOptions o;
  o.learning_rate = 0.0;
  for (int i = 0; i < 3; ++i) adam_step(p, g, st, o);
  EXPECT_EQ(p, before);
}

TEST(Adam, TwoHandComputedSteps) {
  NetworkConfig cfg;
  cfg.encoder_widths = {};
  cfg.embed_dim = 1;
  cfg.head_widths = {};
  cfg.num_point_classes = 1;
  Rng rng(4);
  Parameters p = init_parameters(cfg, rng);
  for (auto& t : p.tensors()) t.tensor->fill(0.0);
  Parameters g = p.zeros_like();
  Tensor2& w = p.encoder[0].weight;
  Tensor2& gw = g.encoder[0].weight;
  w(0, 0) = 1.0;

  AdamOptions o;
  o.learning_rate = 0.1;
  AdamState st = AdamState::for_parameters(p);

  // Step 1, g = 0.5: m = 0.05, v = 0.00025, mhat = 0.5, vhat = 0.25.
  gw(0, 0) = 0.5;
  adam_step(p, g, st, o);
  double expect = 1.0 - 0.1 * 0.5 / (std::sqrt(0.25) + 1e-8);
  EXPECT_NEAR(w(0, 0), expect, 1e-15);

  // Step 2, g = -1: m = 0.9*0.05 - 0.1 = -0.055, v = 0.999*0.00025 + 0.001.
  gw(0, 0) = -1.0;
  adam_step(p, g, st, o);
  const double m = -0.055, v = 0.999 * 0.00025 + 0.001;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  expect -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  EXPECT_NEAR(w(0, 0), expect, 1e-14);
  EXPECT_EQ(st.step, 2);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = -1e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_task("seg"), Task::kFinetuneSegmentation);
  EXPECT_EQ(parse_task("cls"), Task::kFinetuneClassification);
  EXPECT_THROW(parse_task("nope"), ConfigError);
}

TEST(Pretrain, ZeroLearningRateLeavesParametersUnchanged) {
  const Dataset d = tiny_synth(2, 32);
  const JigsawConfig j;
  const NetworkConfig n = desk_net(27);
  TrainConfig t;
  t.epochs = 1;
  t.learning_rate = 0.0;
  Rng init = Rng::stream(t.seed, 0);
  const Parameters start = init_parameters(n, init);
  const TrainResult r = pretrain(d, j, n, t);
  EXPECT_EQ(r.params, start);
  ASSERT_EQ(r.log.records.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.log.records[0].loss));
}

TEST(Pretrain, RequiresMatchingClassCount) {
  const Dataset d = tiny_synth(1, 16);
  TrainConfig t;
  t.epochs = 1;
  EXPECT_THROW(pretrain(d, JigsawConfig{}, desk_net(8), t), ConfigError);
}

TEST(Pretrain, EqualSeedsGiveIdenticalLogs) {
  const Dataset d = tiny_synth(2, 48);
  const NetworkConfig n = desk_net(27);
  TrainConfig t;
  t.epochs = 3;
  t.batch_size = 3;
  t.seed = 9;
  const TrainResult a = pretrain(d, JigsawConfig{}, n, t);
  const TrainResult b = pretrain(d, JigsawConfig{}, n, t);
  EXPECT_EQ(a.log.to_csv(false), b.log.to_csv(false));
  EXPECT_EQ(a.params, b.params);
  t.seed = 10;
  EXPECT_NE(pretrain(d, JigsawConfig{}, n, t).params, a.params);
}

TEST(Pretrain, LossesFiniteAndAccuracyInRange) {
  const Dataset d = tiny_synth(2, 48);
  TrainConfig t;
  t.epochs = 4;
  JigsawConfig j;
  NetworkConfig n = desk_net(27);
  n.condition_dim = 3;
  const TrainResult r = pretrain(d, j, n, t);
  for (const auto& rec : r.log.records) {
    EXPECT_TRUE(std::isfinite(rec.loss));
    EXPECT_GE(rec.loss, 0.0);
    EXPECT_GE(rec.accuracy, 0.0);
    EXPECT_LE(rec.accuracy, 1.0);
  }
  EXPECT_TRUE(r.params.all_finite());
}

TEST(Pretrain, TinyOverfitLossFalls) {
  // Short version of the overfit smoke test; the full 300-epoch run lives in
  // the acceptance suite.
  const Dataset d = tiny_synth(2, 64);
  TrainConfig t;
  t.epochs = 40;
  t.fixed_permutation = true;
  const JigsawConfig j = JigsawConfig::no_augmentation(2);
  const TrainResult r = pretrain(d, j, desk_net(8), t);
  std::vector<double> first, last;
  for (int e = 0; e < 4; ++e) first.push_back(r.log.records[static_cast<std::size_t>(e)].loss);
  for (int e = 36; e < 40; ++e) last.push_back(r.log.records[static_cast<std::size_t>(e)].loss);
  EXPECT_LT(median(last), median(first));
}

TEST(TrainLog, CsvLayout) {
  TrainLog log;
  log.records.push_back({1, 0.5, 0.25, 1.5, std::nullopt});
  EXPECT_EQ(log.to_csv(), "epoch,loss,accuracy,seconds\n1,0.5,0.25,1.5\n");
  EXPECT_EQ(log.to_csv(false), "epoch,loss,accuracy\n1,0.5,0.25\n");
  log.records[0].eval_accuracy = 0.75;
  EXPECT_EQ(log.to_csv(false), "epoch,loss,accuracy,eval_accuracy\n1,0.5,0.25,0.75\n");
}

namespace {

// Two classes whose clouds differ by a constant offset along x. The network
// sees both through its unit-cube normalization, so the offset is encoded
// by the shape: class 1 clouds are stretched along x.
Dataset offset_dataset() {
  Dataset d;
  d.name = "offset";
  Rng rng(5);
  std::vector<int> labels;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 6; ++i) {
      std::vector<Point3> pts;
      for (int p = 0; p < 32; ++p) {
        const double x = rng.uniform();
        pts.push_back({c == 0 ? x : 0.25 * x, rng.uniform(), rng.uniform() + (c == 0 ? 0.0 : 3.0)});
      }
      pts.push_back({1.0, 0.0, 0.0});
      d.clouds.emplace_back(std::move(pts));
      labels.push_back(c);
    }
  }
  d.class_labels = labels;
  d.num_classes = 2;
  d.class_names = {"a", "b"};
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  d.splits["train"] = all;
  d.validate();
  return d;
}

}  // namespace

TEST(Finetune, ZeroLearningRateLeavesParametersUnchanged) {
  const Dataset d = offset_dataset();
  Rng rng(6);
  const NetworkConfig n = desk_net(4);
  const Parameters p = attach_classifier(init_parameters(n, rng), 2, rng);
  TrainConfig t;
  t.epochs = 2;
  t.learning_rate = 0.0;
  t.task = Task::kFinetuneClassification;
  EXPECT_EQ(finetune(p, d, n, t).params, p);
}

TEST(Finetune, LinearlyTrivialClassificationReachesFullAccuracy) {
  const Dataset d = offset_dataset();
  Rng rng(7);
  const NetworkConfig n = desk_net(4);
  const Parameters p = attach_classifier(init_parameters(n, rng), 2, rng);
  TrainConfig t;
  t.epochs = 50;
  t.batch_size = 4;
  t.task = Task::kFinetuneClassification;
  const TrainResult r = finetune(p, d, n, t);
  EXPECT_EQ(r.log.records.back().accuracy, 1.0);
  EXPECT_EQ(evaluate(r.params, d, "train", t.task).accuracy, 1.0);
}

TEST(Finetune, MissingLabelsIsConfigError) {
  Dataset d = offset_dataset();
  d.class_labels.reset();
  d.num_classes.reset();
  Rng rng(8);
  const NetworkConfig n = desk_net(4);
  const Parameters p = attach_classifier(init_parameters(n, rng), 2, rng);
  TrainConfig t;
  t.epochs = 1;
  t.task = Task::kFinetuneClassification;
  EXPECT_THROW(finetune(p, d, n, t), ConfigError);
  t.task = Task::kFinetuneSegmentation;
  EXPECT_THROW(finetune(p, d, n, t), ConfigError);
}

TEST(Finetune, SegmentationOnSynthParts) {
  const Dataset d = tiny_synth(3, 64);
  Rng rng(9);
  NetworkConfig n = desk_net(*d.num_part_classes);
  n.condition_dim = *d.num_classes;
  const Parameters p = init_parameters(n, rng);
  TrainConfig t;
  t.epochs = 30;
  t.task = Task::kFinetuneSegmentation;
  FinetuneOptions o;
  o.eval_split = "test";
  const TrainResult r = finetune(p, d, n, t, o);
  ASSERT_EQ(r.log.records.size(), 30u);
  EXPECT_TRUE(r.log.records.back().eval_accuracy.has_value());
  EXPECT_GT(r.log.records.back().accuracy, r.log.records.front().accuracy);
  const Metrics m = evaluate(r.params, d, "test", t.task);
  ASSERT_TRUE(m.miou.has_value());
  EXPECT_GE(*m.miou, 0.0);
  EXPECT_LE(*m.miou, 100.0);
}

TEST(Evaluate, PureAndUnknownSplitRejected) {
  const Dataset d = tiny_synth(2, 32);
  Rng rng(10);
  const Parameters p = init_parameters(desk_net(27), rng);
  const auto sum = checksum(p);
  const Metrics a = evaluate(p, d, "train", Task::kPretrain);
  const Metrics b = evaluate(p, d, "train", Task::kPretrain);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(checksum(p), sum);
  EXPECT_THROW(evaluate(p, d, "val", Task::kPretrain), ConfigError);
}

TEST(Evaluate, AgreesWithDownstreamMetrics) {
  const Dataset d = tiny_synth(3, 48);
  Rng rng(11);
  NetworkConfig n = desk_net(*d.num_part_classes);
  n.condition_dim = *d.num_classes;
  const Parameters p = init_parameters(n, rng);
  const Metrics m = evaluate(p, d, "test", Task::kFinetuneSegmentation);

  std::vector<std::vector<int>> preds, labels;
  std::vector<int> cls;
  std::vector<int> flat_p, flat_l;
  for (std::size_t idx : d.split("test")) {
    const int c = (*d.class_labels)[idx];
    const std::vector<double> cond = one_hot(c, n.condition_dim);
    const ForwardOutput out = forward(p, network_input(d.clouds[idx]), cond);
    std::vector<int> pr(out.logits.rows());
    for (std::size_t i = 0; i < pr.size(); ++i) {
      const auto row = out.logits.row(i);
      pr[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    flat_p.insert(flat_p.end(), pr.begin(), pr.end());
    const auto& lab = (*d.point_labels)[idx];
    flat_l.insert(flat_l.end(), lab.begin(), lab.end());
    preds.push_back(pr);
    labels.push_back(lab);
    cls.push_back(c);
  }
  EXPECT_NEAR(m.accuracy, oracle::accuracy(flat_p, flat_l), 1e-12);
  EXPECT_NEAR(*m.miou, oracle::mean_iou(preds, labels, d.parts_per_class, cls), 1e-12);
}

TEST(Evaluate, MemorizingModelScoresOne) {
  // A classifier whose bias alone picks the only class present.
  Dataset d = offset_dataset();
  std::vector<int> only_zero(d.size(), 0);
  d.class_labels = only_zero;
  Rng rng(12);
  Parameters p = attach_classifier(init_parameters(desk_net(4), rng), 2, rng);
  p.classifier->weight.fill(0.0);
  p.classifier->bias(0, 0) = 1.0;
  EXPECT_EQ(evaluate(p, d, "train", Task::kFinetuneClassification).accuracy, 1.0);
}
