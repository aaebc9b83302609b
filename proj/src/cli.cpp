#include "sgdsa/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "sgdsa/checkpoint.hpp"
#include "sgdsa/data.hpp"
#include "sgdsa/gradcheck.hpp"
#include "sgdsa/harness.hpp"
#include "sgdsa/kernels.hpp"

namespace sgdsa::cli {
namespace {

namespace fs = std::filesystem;

// Flag values that fail validation after CLI11 has parsed them.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    parts.push_back(first == std::string::npos ? std::string() : item.substr(first, last - first + 1));
  }
  if (!text.empty() && text.back() == ',') parts.emplace_back();
  return parts;
}

struct DataOptions {
  std::string csv;
  std::string label_column = "label";
  std::string idx_images;
  std::string idx_labels;
};

struct TrainOptions {
  std::string optimizer = "sgd-sa";
  std::size_t epochs = 100;
  std::size_t batch_size = 512;
  std::uint64_t seed = 1;
  double t0 = 1.0;
  double alpha = 0.8;
  std::string lr_set = "0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1,0.09,0.08,0.07,0.06,0.05";
  std::string schedule = "30:0.1,40:0.01,30:0.001";
  double epsilon = 0.01;
  double val_fraction = 0.2;
  std::string cooling_per = "epoch";
  std::string hidden = "32,16";
  std::string activation = "relu";
  std::uint64_t split_seed = 0;
  bool standardize = false;
  std::string out;
  std::string simd = "auto";
  std::string seeds = "1,2,3,4,5,6,7,8,9,10";
  std::size_t jobs = 1;
};

void add_data_flags(CLI::App& cmd, DataOptions& d) {
  cmd.add_option("--csv", d.csv, "CSV dataset with a header row");
  cmd.add_option("--label-column", d.label_column, "Name of the label column in --csv")->capture_default_str();
  cmd.add_option("--idx-images", d.idx_images, "IDX image file (magic 0x00000803)");
  cmd.add_option("--idx-labels", d.idx_labels, "IDX label file (magic 0x00000801)");
}

void add_split_flags(CLI::App& cmd, TrainOptions& o) {
  cmd.add_option("--val-fraction", o.val_fraction, "Validation share of the dataset")->capture_default_str();
  cmd.add_option("--split-seed", o.split_seed, "Seed of the train/validation split")->capture_default_str();
  cmd.add_flag("--standardize", o.standardize, "Standardize features with training-split statistics");
}

void add_train_flags(CLI::App& cmd, TrainOptions& o) {
  cmd.add_option("--optimizer", o.optimizer, "sgd | sgd-sa | ssa")->capture_default_str();
  cmd.add_option("--epochs", o.epochs, "Number of epochs")->capture_default_str();
  cmd.add_option("--batch-size", o.batch_size, "Minibatch size")->capture_default_str();
  cmd.add_option("--seed", o.seed, "Master random seed")->capture_default_str();
  cmd.add_option("--t0", o.t0, "Initial temperature")->capture_default_str();
  cmd.add_option("--alpha", o.alpha, "Cooling factor in (0,1); default 0.8, or 0.97 for ssa");
  cmd.add_option("--lr-set", o.lr_set, "Comma-separated candidate learning rates (sgd-sa)")->capture_default_str();
  cmd.add_option("--schedule", o.schedule, "epochs:rate spans for sgd")->capture_default_str();
  cmd.add_option("--epsilon", o.epsilon, "Random-direction scale (ssa)")->capture_default_str();
  cmd.add_option("--cooling-per", o.cooling_per, "epoch | iteration")->capture_default_str();
  cmd.add_option("--hidden", o.hidden, "Comma-separated hidden layer widths")->capture_default_str();
  cmd.add_option("--activation", o.activation, "relu | tanh")->capture_default_str();
  cmd.add_option("--out", o.out, "Output directory (default $SGDSA_OUT_ROOT/<run> or runs/<run>)");
  cmd.add_option("--simd", o.simd, "auto | scalar | avx2 | neon")->capture_default_str();
  add_split_flags(cmd, o);
}

template <typename T>
T parse_number(const std::string& text, const std::string& flag) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw UsageError(flag + ": '" + text + "' is not a valid number");
  }
  return value;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  for (const auto& part : split_commas(text)) {
    const auto v = parse_number<std::size_t>(part, flag);
    if (v == 0) throw UsageError(flag + ": widths must be positive");
    out.push_back(v);
  }
  return out;
}

LearningRateSchedule parse_schedule(const std::string& text) {
  std::vector<ScheduleSpan> spans;
  for (const auto& part : split_commas(text)) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw UsageError("--schedule: expected epochs:rate, got '" + part + "'");
    spans.push_back({parse_number<std::size_t>(part.substr(0, colon), "--schedule"),
                     parse_number<double>(part.substr(colon + 1), "--schedule")});
  }
  try {
    return LearningRateSchedule(std::move(spans));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--schedule: ") + e.what());
  }
}

void apply_simd(const std::string& name) {
  const auto backend = kernels::parse_backend(name);
  if (!backend) throw UsageError("--simd: unknown backend '" + name + "'");
  if (!kernels::available(*backend)) throw UsageError("--simd: backend '" + name + "' is not supported on this CPU");
  kernels::select(*backend);
}

void reject_foreign(const CLI::App& cmd, const std::string& flag, OptimizerKind selected,
                    std::initializer_list<OptimizerKind> owners) {
  if (cmd.count(flag) == 0) return;
  for (auto owner : owners) {
    if (owner == selected) return;
  }
  throw UsageError(flag + " conflicts with --optimizer " + std::string(optimizer_name(selected)));
}

TrainingConfig build_config(const CLI::App& cmd, const TrainOptions& o) {
  TrainingConfig c;
  try {
    c.optimizer = parse_optimizer(o.optimizer);
    c.cooling_per = parse_cooling(o.cooling_per);
    c.activation = parse_activation(o.activation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  reject_foreign(cmd, "--lr-set", c.optimizer, {OptimizerKind::sgd_sa});
  reject_foreign(cmd, "--schedule", c.optimizer, {OptimizerKind::sgd});
  reject_foreign(cmd, "--epsilon", c.optimizer, {OptimizerKind::ssa});
  reject_foreign(cmd, "--t0", c.optimizer, {OptimizerKind::sgd_sa, OptimizerKind::ssa});
  reject_foreign(cmd, "--alpha", c.optimizer, {OptimizerKind::sgd_sa, OptimizerKind::ssa});
  reject_foreign(cmd, "--cooling-per", c.optimizer, {OptimizerKind::sgd_sa, OptimizerKind::ssa});

  if (o.epochs == 0) throw UsageError("--epochs must be positive");
  if (o.batch_size == 0) throw UsageError("--batch-size must be positive");
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.seed = o.seed;
  c.t0 = o.t0;
  c.alpha = cmd.count("--alpha") == 0 && c.optimizer == OptimizerKind::ssa ? 0.97 : o.alpha;
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    throw UsageError("--alpha must lie in the open interval (0,1), got " + std::to_string(c.alpha));
  }
  if (!(c.t0 > 0.0) || !std::isfinite(c.t0)) throw UsageError("--t0 must be > 0, got " + std::to_string(c.t0));
  if (!(o.epsilon >= 0.0) || !std::isfinite(o.epsilon)) throw UsageError("--epsilon must be >= 0");
  c.epsilon = o.epsilon;
  if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) throw UsageError("--val-fraction must lie in (0,1)");
  c.val_fraction = o.val_fraction;
  c.split_seed = o.split_seed;
  c.standardize = o.standardize;
  c.hidden_layers = parse_sizes(o.hidden, "--hidden");
  {
    const auto rates = parse_real_list(o.lr_set, "--lr-set");
    try {
      c.lr_set = LearningRateSet(rates);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--lr-set: ") + e.what());
    }
  }
  c.schedule = parse_schedule(o.schedule);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

Dataset load_dataset(const DataOptions& d) {
  const bool has_csv = !d.csv.empty();
  const bool has_idx = !d.idx_images.empty() || !d.idx_labels.empty();
  if (has_csv && has_idx) throw UsageError("--csv conflicts with --idx-images/--idx-labels");
  if (!has_csv && !has_idx) throw UsageError("missing dataset path: pass --csv or --idx-images and --idx-labels");
  if (has_idx && (d.idx_images.empty() || d.idx_labels.empty())) {
    throw UsageError("--idx-images and --idx-labels must be given together");
  }
  Dataset data = has_csv ? load_csv(d.csv, d.label_column) : load_idx(d.idx_images, d.idx_labels);
  data.validate();
  return data;
}

SplitDatasets prepare(const Dataset& data, const TrainingConfig& c) {
  SplitDatasets parts = split(data, c.val_fraction, RngState::new_master(c.split_seed));
  if (c.standardize) {
    const auto s = Standardizer::fit(parts.train);
    s.apply(parts.train);
    s.apply(parts.val);
  }
  return parts;
}

fs::path output_dir(const std::string& flag_value, const std::string& default_name) {
  if (!flag_value.empty()) return flag_value;
  const char* root = std::getenv("SGDSA_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / default_name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  file << text;
}

void write_run(const fs::path& dir, const TrainingConfig& c, const TrainingResult& r) {
  fs::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", r.log, c);
  save_checkpoint(dir / "best.ckpt", r.best);
  write_text(dir / "run.json", run_metadata_json(c, r));
}

std::string summary_line(std::uint64_t seed, const TrainingResult& r) {
  const auto& last = r.log.back();
  std::ostringstream s;
  s.precision(6);
  s << "seed " << seed << ": final val_loss " << last.val_loss << " val_acc " << last.val_accuracy
    << " | best val_acc " << r.best.val_accuracy << " at epoch " << r.best.epoch << " | train_acc "
    << last.train_accuracy;
  return s.str();
}

int run_train(const CLI::App& cmd, const TrainOptions& o, const DataOptions& d, std::ostream& out) {
  apply_simd(o.simd);
  const TrainingConfig c = build_config(cmd, o);
  const SplitDatasets parts = prepare(load_dataset(d), c);
  const TrainingResult r = train(c, parts.train, parts.val);
  const fs::path dir = output_dir(o.out, "train-seed" + std::to_string(c.seed));
  write_run(dir, c, r);
  std::vector<SeedRun> runs(1);
  runs[0].seed = c.seed;
  runs[0].result = r;
  write_summary_csv(dir / "summary.csv", runs);
  out << summary_line(c.seed, r) << "\n";
  return kExitOk;
}

int run_multi_seed(const CLI::App& cmd, const TrainOptions& o, const DataOptions& d, std::ostream& out,
                   std::ostream& err) {
  apply_simd(o.simd);
  if (cmd.count("--seed")) throw UsageError("--seed conflicts with --seeds; multi-seed takes --seeds");
  const TrainingConfig c = build_config(cmd, o);
  std::vector<std::uint64_t> seeds;
  for (auto s : parse_uint_list(o.seeds, "--seeds")) seeds.push_back(s);
  if (seeds.empty()) throw UsageError("--seeds: seed list is empty");
  const SplitDatasets parts = prepare(load_dataset(d), c);
  const auto runs = multi_seed(c, seeds, parts.train, parts.val, o.jobs);
  const fs::path dir = output_dir(o.out, std::string("multi-seed-") + std::string(optimizer_name(c.optimizer)));
  fs::create_directories(dir);
  bool failed = false;
  for (const auto& run : runs) {
    if (!run.result) {
      err << "seed " << run.seed << " failed: " << run.error << "\n";
      failed = true;
      continue;
    }
    TrainingConfig seeded = c;
    seeded.seed = run.seed;
    write_run(dir / ("seed-" + std::to_string(run.seed)), seeded, *run.result);
    out << summary_line(run.seed, *run.result) << "\n";
  }
  write_summary_csv(dir / "summary.csv", runs);
  return failed ? kExitRuntime : kExitOk;
}

int run_evaluate(const TrainOptions& o, const DataOptions& d, const std::string& checkpoint_path,
                 const std::string& subset_name, std::ostream& out) {
  apply_simd(o.simd);
  if (checkpoint_path.empty()) throw UsageError("--checkpoint is required");
  if (subset_name != "all" && subset_name != "train" && subset_name != "val") {
    throw UsageError("--subset must be all, train or val");
  }
  if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) throw UsageError("--val-fraction must lie in (0,1)");
  if (o.batch_size == 0) throw UsageError("--batch-size must be positive");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Dataset data = load_dataset(d);
  TrainingConfig c;
  c.val_fraction = o.val_fraction;
  c.split_seed = o.split_seed;
  c.standardize = o.standardize;
  Dataset target;
  if (subset_name == "all") {
    if (c.standardize) {
      // Statistics always come from the training part of the split.
      SplitDatasets raw = split(data, c.val_fraction, RngState::new_master(c.split_seed));
      Standardizer::fit(raw.train).apply(data);
    }
    target = std::move(data);
  } else {
    SplitDatasets parts = prepare(data, c);
    target = subset_name == "train" ? std::move(parts.train) : std::move(parts.val);
  }
  if (target.feature_count() != ckpt.spec.input_dim()) {
    throw UsageError("dataset has " + std::to_string(target.feature_count()) + " features, checkpoint expects " +
                     std::to_string(ckpt.spec.input_dim()));
  }
  const Evaluation e = evaluate(ckpt.spec, ckpt.weights, target, o.batch_size);
  out.precision(10);
  out << "samples " << target.size() << " loss " << e.loss << " accuracy " << e.accuracy << "\n";
  return kExitOk;
}

int run_gradcheck(std::uint64_t seed, const std::string& hidden, const std::string& activation, std::size_t inputs,
                  std::size_t classes, std::size_t batch, std::ostream& out) {
  if (inputs == 0 || classes == 0 || batch == 0) throw UsageError("--inputs, --classes and --batch must be positive");
  NetworkSpec spec;
  spec.layer_sizes.push_back(inputs);
  for (auto h : parse_sizes(hidden, "--hidden")) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(classes);
  try {
    spec.activation = parse_activation(activation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RngState master = RngState::new_master(seed);
  RngState rng_init = master.substream(Purpose::init);
  ParameterVector w = init_weights(spec, rng_init);
  RngState rng_data = master.substream(Purpose::shuffle);
  // Zero biases put dead-unit pre-activations exactly on the relu kink, where
  // central differences are meaningless.
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    for (std::size_t j = 0; j < spec.layer_sizes[l + 1]; ++j) w.values[spec.bias_offset(l) + j] = 0.1 * rng_data.normal();
  }
  Minibatch mb;
  mb.inputs = Matrix(batch, inputs);
  for (auto& x : mb.inputs.data) x = rng_data.normal();
  for (std::size_t i = 0; i < batch; ++i) mb.targets.push_back(rng_data.choice(classes));
  const GradCheckReport report = check_gradient(spec, w, mb);
  out.precision(3);
  out << "gradcheck: " << report.coordinates_checked << " parameters, max relative error " << std::scientific
      << report.max_relative_error << " (coordinate " << report.worst_coordinate << ")\n";
  return report.max_relative_error < 1e-4 ? kExitOk : kExitRuntime;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  if (text.empty()) throw UsageError(flag + ": list is empty");
  for (const auto& part : split_commas(text)) out.push_back(parse_number<double>(part, flag));
  return out;
}

std::vector<unsigned long long> parse_uint_list(const std::string& text, const std::string& flag) {
  std::vector<unsigned long long> out;
  if (text.empty()) throw UsageError(flag + ": list is empty");
  for (const auto& part : split_commas(text)) out.push_back(parse_number<unsigned long long>(part, flag));
  return out;
}

int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural-network training with simulated-annealing SGD"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  TrainOptions o;
  DataOptions d;

  auto* train_cmd = app.add_subcommand("train", "Train one run and write metrics.csv, summary.csv, best.ckpt");
  add_train_flags(*train_cmd, o);
  add_data_flags(*train_cmd, d);

  auto* multi_cmd = app.add_subcommand("multi-seed", "Repeat a training run over several seeds");
  add_train_flags(*multi_cmd, o);
  add_data_flags(*multi_cmd, d);
  multi_cmd->add_option("--seeds", o.seeds, "Comma-separated seeds")->capture_default_str();
  multi_cmd->add_option("--jobs", o.jobs, "Concurrent runs")->capture_default_str();

  std::string checkpoint_path;
  std::string subset_name = "all";
  auto* eval_cmd = app.add_subcommand("evaluate", "Loss and accuracy of a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("--subset", subset_name, "all | train | val")->capture_default_str();
  eval_cmd->add_option("--batch-size", o.batch_size, "Evaluation batch size")->capture_default_str();
  eval_cmd->add_option("--simd", o.simd, "auto | scalar | avx2 | neon")->capture_default_str();
  add_split_flags(*eval_cmd, o);
  add_data_flags(*eval_cmd, d);

  std::uint64_t gc_seed = 0;
  std::string gc_hidden = "16,8";
  std::string gc_activation = "tanh";
  std::size_t gc_inputs = 6;
  std::size_t gc_classes = 4;
  std::size_t gc_batch = 8;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare backpropagation with central finite differences");
  grad_cmd->add_option("--seed", gc_seed, "Seed for the random network and batch")->capture_default_str();
  grad_cmd->add_option("--hidden", gc_hidden, "Hidden layer widths")->capture_default_str();
  grad_cmd->add_option("--activation", gc_activation, "relu | tanh")->capture_default_str();
  grad_cmd->add_option("--inputs", gc_inputs, "Input dimension")->capture_default_str();
  grad_cmd->add_option("--classes", gc_classes, "Class count")->capture_default_str();
  grad_cmd->add_option("--batch", gc_batch, "Batch size")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return run_train(*train_cmd, o, d, out);
    if (multi_cmd->parsed()) return run_multi_seed(*multi_cmd, o, d, out, err);
    if (eval_cmd->parsed()) return run_evaluate(o, d, checkpoint_path, subset_name, out);
    if (grad_cmd->parsed()) return run_gradcheck(gc_seed, gc_hidden, gc_activation, gc_inputs, gc_classes, gc_batch, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sgdsa::cli
