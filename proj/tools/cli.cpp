#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "jigsaw3d/checkpoint.hpp"
#include "jigsaw3d/csv.hpp"
#include "jigsaw3d/dataset_io.hpp"
#include "jigsaw3d/downstream.hpp"
#include "jigsaw3d/errors.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/run_config.hpp"
#include "jigsaw3d/train.hpp"

namespace jigsaw3d::cli {
namespace {

namespace fs = std::filesystem;

// Values given on the command line; each one overrides the config file.
struct Overrides {
  std::string config_path;
  std::string data;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<int> k;
  std::optional<std::size_t> off_samples;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "RunConfig JSON file");
  cmd->add_option("--data", o.data, "dataset directory or synth:<spec>");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--off-samples", o.off_samples, "surface samples per OFF mesh");
}

void add_training(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--lr", o.learning_rate);
}

RunConfig load_config(const Overrides& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = RunConfig::from_json(read_file(o.config_path));
  if (!o.data.empty()) cfg.data = o.data;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
  if (o.k) cfg.jigsaw.k = *o.k;
  if (o.off_samples) cfg.off_samples = *o.off_samples;
  if (cfg.data.empty()) throw ConfigError("no dataset: pass --data or set \"data\" in the config");
  return cfg;
}

Dataset load(const RunConfig& cfg, const std::string& source) {
  LoadOptions lo;
  lo.off_samples = cfg.off_samples;
  lo.seed = cfg.train.seed;
  return load_dataset(source, lo);
}

void write_snapshot(const fs::path& out, const RunConfig& cfg) {
  write_file_atomic(fs::path(out.string() + ".config.json"), cfg.to_json());
}

void progress(int epoch, const Parameters&, const EpochRecord& rec) {
  std::cerr << "epoch " << epoch << " loss " << rec.loss << " acc " << rec.accuracy;
  if (rec.eval_accuracy) std::cerr << " eval " << *rec.eval_accuracy;
  std::cerr << "\n";
}

int cmd_pretrain(const Overrides& o, const std::string& out) {
  RunConfig cfg = load_config(o);
  cfg.train.task = Task::kPretrain;
  cfg.resolve();
  const Dataset data = load(cfg, cfg.data);
  std::cerr << "pretrain: " << data.size() << " clouds, k=" << cfg.jigsaw.k << ", "
            << cfg.train.epochs << " epochs\n";
  const TrainResult r = pretrain(data, cfg.jigsaw, cfg.network, cfg.train, progress);
  save_checkpoint(out, Checkpoint{kCheckpointFormatVersion, r.params, r.steps, cfg.train.seed});
  write_file_atomic(out + ".log.csv", r.log.to_csv());
  write_snapshot(out, cfg);
  return 0;
}

int cmd_finetune(const Overrides& o, const std::string& ckpt_path, const std::string& task,
                 const std::string& out, const std::optional<std::string>& eval_split) {
  RunConfig cfg = load_config(o);
  cfg.train.task = parse_task(task);
  if (cfg.train.task == Task::kPretrain) throw ConfigError("finetune: --task must be seg or cls");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset data = load(cfg, cfg.data);
  Rng head_rng = Rng::stream(cfg.train.seed, 1);
  Parameters start;
  if (cfg.train.task == Task::kFinetuneClassification) {
    if (!data.num_classes) throw ConfigError("finetune: dataset has no class labels");
    start = attach_classifier(ckpt.params, *data.num_classes, head_rng);
  } else {
    if (!data.num_part_classes) throw ConfigError("finetune: dataset has no per-point labels");
    start = swap_head(ckpt.params, *data.num_part_classes, head_rng,
                      data.num_classes ? *data.num_classes : 0);
  }
  cfg.network = start.config;
  FinetuneOptions fo;
  fo.train_split = cfg.split_train;
  fo.eval_split = eval_split;
  const TrainResult r = finetune(start, data, cfg.network, cfg.train, fo, progress);
  save_checkpoint(out, Checkpoint{kCheckpointFormatVersion, r.params, r.steps, cfg.train.seed});
  write_file_atomic(out + ".log.csv", r.log.to_csv());
  write_snapshot(out, cfg);
  return 0;
}

std::vector<std::size_t> split_indices(const Dataset& d, const std::string& split) {
  return split.empty() ? d.split_or_all("") : d.split(split);
}

int cmd_embed(const Overrides& o, const std::string& ckpt_path, const std::string& out,
              const std::string& pca_out, const std::string& split) {
  const RunConfig cfg = load_config(o);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset data = load(cfg, cfg.data);
  const std::vector<std::size_t> idx = split_indices(data, split);
  const auto emb = embed_clouds(frozen_embedding(ckpt.params), data, idx);
  std::vector<int> labels;
  for (std::size_t i : idx) labels.push_back(data.class_labels ? (*data.class_labels)[i] : -1);
  write_file_atomic(out, embeddings_csv(idx, labels, emb));
  if (!pca_out.empty()) {
    Rng rng = Rng::stream(cfg.train.seed, 2);
    write_file_atomic(pca_out, pca_csv(idx, labels, pca_2d(emb, rng)));
  }
  return 0;
}

int cmd_eval_svm(const Overrides& o, const std::string& ckpt_path, std::optional<double> frac,
                 std::optional<std::size_t> n_labels, std::optional<double> c_reg,
                 bool unit_norm, std::optional<std::uint64_t> random_init,
                 const std::string& out) {
  RunConfig cfg = load_config(o);
  if (frac) cfg.labels_frac = frac;
  if (n_labels) cfg.labels_n = n_labels;
  if (c_reg) cfg.svm.c_reg = *c_reg;
  if (unit_norm) cfg.svm.unit_norm = true;
  if (cfg.labels_frac && cfg.labels_n) {
    throw ConfigError("eval-svm: --labels-frac and --labels-n are mutually exclusive");
  }
  if (cfg.labels_frac && !(*cfg.labels_frac > 0.0 && *cfg.labels_frac <= 1.0)) {
    throw ConfigError("eval-svm: --labels-frac must be in (0, 1]");
  }
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  cfg.network = ckpt.params.config;
  Parameters params = ckpt.params;
  if (random_init) {
    Rng r = Rng::stream(*random_init, 0);
    params = init_parameters(ckpt.params.config, r);
  }
  const Dataset data = load(cfg, cfg.data);
  const std::vector<std::size_t>& train = data.split(cfg.split_train);

  std::optional<FewShotPlan> plan;
  if (cfg.labels_frac || cfg.labels_n) {
    std::size_t n = cfg.labels_n ? *cfg.labels_n : 0;
    if (cfg.labels_frac) {
      n = static_cast<std::size_t>(std::llround(*cfg.labels_frac * static_cast<double>(train.size())));
      n = std::max<std::size_t>(n, static_cast<std::size_t>(data.num_classes.value_or(1)));
    }
    Rng plan_rng = Rng::stream(cfg.train.seed, 3);
    plan = few_shot_sample(data, cfg.split_train, n, plan_rng);
  }
  Rng svm_rng = Rng::stream(cfg.train.seed, 4);
  std::optional<std::span<const std::size_t>> subset;
  if (plan) subset = std::span<const std::size_t>(plan->selected_indices);
  const TransferReport rep = transfer_eval(params, ckpt_path, data, cfg.split_train,
                                           cfg.split_test, cfg.svm, svm_rng, subset);
  std::ostringstream csv;
  csv << "eval_dataset,num_train,num_test,seed,accuracy\n"
      << data.name << ',' << rep.num_train << ',' << rep.num_test << ',' << cfg.train.seed << ','
      << format_real(rep.accuracy) << "\n";
  std::cout << "accuracy " << format_real(rep.accuracy) << " (" << rep.num_train << " train, "
            << rep.num_test << " test)\n";
  if (!out.empty()) {
    write_file_atomic(out, csv.str());
    write_snapshot(out, cfg);
  }
  return 0;
}

std::string xyz_lines(const PointCloud& c, const std::vector<VoxelId>* labels) {
  std::ostringstream os;
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << format_real(c[i].x) << ' ' << format_real(c[i].y) << ' ' << format_real(c[i].z);
    if (labels) os << ' ' << (*labels)[i];
    os << "\n";
  }
  return os.str();
}

int cmd_preview(const Overrides& o, const std::string& prefix, std::size_t index) {
  const RunConfig cfg = load_config(o);
  const Dataset data = load(cfg, cfg.data);
  if (index >= data.size()) throw ConfigError("jigsaw-preview: --index out of range");
  Rng rng = Rng::stream(cfg.train.seed, 5);
  const PointCloud* donor = cfg.jigsaw.replace_count > 0
                                ? &data.clouds[static_cast<std::size_t>(rng.uniform_int(data.size()))]
                                : nullptr;
  const PointCloud& cloud = data.clouds[index];
  const JigsawSample s = make_jigsaw_sample(cloud, cfg.jigsaw, rng, donor);
  const PointCloud unit = scale_to_unit_cube(cloud);
  const VoxelAssignment va = voxelize(unit, cfg.jigsaw.k);
  write_file_atomic(prefix + ".original.xyz", xyz_lines(unit, &va.ids));
  write_file_atomic(prefix + ".shuffled.xyz", xyz_lines(s.shuffled, &s.targets));
  std::vector<VoxelId> dest;
  for (VoxelId t : s.targets) dest.push_back(s.permutation(t));
  write_file_atomic(prefix + ".labels.xyz", xyz_lines(s.shuffled, &dest));
  return 0;
}

std::vector<char*> argv_of(std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return argv;
}

}  // namespace

int run(const std::vector<std::string>& input) {
  CLI::App app{"Voxel-shuffle self-supervised pretraining for point clouds"};
  app.require_subcommand(1);

  Overrides po, fo, eo, so, vo;
  std::string out, ckpt, task = "cls", pca, split, svm_out;
  std::optional<std::string> eval_split;
  std::optional<double> frac, c_reg;
  std::optional<std::size_t> n_labels;
  std::optional<std::uint64_t> random_init;
  bool unit_norm = false;
  std::size_t index = 0;

  auto* pre = app.add_subcommand("pretrain", "self-supervised voxel-ID pretraining");
  add_common(pre, po);
  add_training(pre, po);
  pre->add_option("--k", po.k, "voxels per axis");
  pre->add_option("--out", out, "checkpoint path")->required();

  auto* fine = app.add_subcommand("finetune", "swap the head and train on labels");
  add_common(fine, fo);
  add_training(fine, fo);
  fine->add_option("--ckpt", ckpt)->required();
  fine->add_option("--task", task, "seg or cls")->check(CLI::IsMember({"seg", "cls"}));
  fine->add_option("--out", out)->required();
  fine->add_option("--eval-split", eval_split);

  auto* emb = app.add_subcommand("embed", "export global embeddings as CSV");
  add_common(emb, eo);
  emb->add_option("--ckpt", ckpt)->required();
  emb->add_option("--out", out)->required();
  emb->add_option("--pca2d", pca, "also write a 2-D PCA projection");
  emb->add_option("--split", split, "only this split (default: every cloud)");

  auto* svm = app.add_subcommand("eval-svm", "linear SVM on frozen embeddings");
  add_common(svm, so);
  svm->add_option("--ckpt", ckpt)->required();
  auto* f_opt = svm->add_option("--labels-frac", frac, "fraction of the train split");
  svm->add_option("--labels-n", n_labels, "number of labeled train samples")->excludes(f_opt);
  svm->add_option("--c", c_reg, "SVM regularization C");
  svm->add_flag("--unit-norm", unit_norm, "scale embeddings to unit length");
  svm->add_option("--random-init", random_init,
                  "evaluate freshly initialized weights (seeded) instead of the checkpoint");
  svm->add_option("--out", svm_out, "metrics CSV");

  auto* prev = app.add_subcommand("jigsaw-preview", "write original/shuffled/label clouds");
  add_common(prev, vo);
  prev->add_option("--k", vo.k);
  prev->add_option("--index", index, "cloud index");
  prev->add_option("--out", out, "output prefix")->required();

  bool verbose = false;
  auto* check = app.add_subcommand("selfcheck", "run the quick oracle/invariant suite");
  check->add_flag("-v,--verbose", verbose);

  std::vector<std::string> args = input;
  std::vector<char*> argv = argv_of(args);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*pre) return cmd_pretrain(po, out);
    if (*fine) return cmd_finetune(fo, ckpt, task, out, eval_split);
    if (*emb) return cmd_embed(eo, ckpt, out, pca, split);
    if (*svm) return cmd_eval_svm(so, ckpt, frac, n_labels, c_reg, unit_norm, random_init, svm_out);
    if (*prev) return cmd_preview(vo, out, index);
    if (*check) return selfcheck(verbose) == 0 ? 0 : 1;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace jigsaw3d::cli
