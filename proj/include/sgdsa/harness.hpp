#pragma once

// Training loop, validation, best-on-validation checkpointing, metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgdsa/checkpoint.hpp"
#include "sgdsa/data.hpp"
#include "sgdsa/nn.hpp"
#include "sgdsa/optim.hpp"

namespace sgdsa {

inline constexpr std::string_view kVersion = "1.0.0";

enum class OptimizerKind { sgd, sgd_sa, ssa };
enum class CoolingPer { epoch, iteration };

std::string_view optimizer_name(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view name);
std::string_view cooling_name(CoolingPer per) noexcept;
CoolingPer parse_cooling(std::string_view name);

struct TrainingConfig {
  OptimizerKind optimizer = OptimizerKind::sgd_sa;
  std::size_t epochs = 100;
  std::size_t batch_size = 512;
  std::uint64_t seed = 1;
  double t0 = 1.0;
  double alpha = 0.8;
  LearningRateSet lr_set = LearningRateSet::standard();
  LearningRateSchedule schedule = LearningRateSchedule::standard();
  double epsilon = 0.01;
  double val_fraction = 0.2;
  CoolingPer cooling_per = CoolingPer::epoch;
  std::vector<std::size_t> hidden_layers = {32, 16};
  Activation activation = Activation::relu;
  /// Data preparation, applied by callers before train(): the split is keyed
  /// by split_seed so every training seed sees the same validation set.
  std::uint64_t split_seed = 0;
  bool standardize = false;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  /// Canonical one-line description; its FNV-1a hash is the config digest.
  std::string describe() const;
  std::uint64_t digest() const { return fnv1a64(describe()); }
  NetworkSpec network_for(std::size_t feature_count, std::size_t class_count) const;
};

struct MetricsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  /// Temperature after this epoch's cooling, t0 * alpha^epoch for per-epoch cooling.
  double temperature = 0.0;
  double mean_accept_prob_clipped = 1.0;
  std::size_t improving_moves = 0;
  std::size_t accepted_worsening_moves = 0;
  std::size_t rejected_moves = 0;
  std::vector<std::size_t> eta_histogram;
};

struct TrainingResult {
  Checkpoint best;
  std::vector<MetricsRecord> log;
  ParameterVector final_weights;
  /// One character per annealed step, '1' accepted and '0' rejected.
  std::string decisions;
  /// Steps attempted (the iteration counter) and steps whose move was applied.
  std::size_t steps_attempted = 0;
  std::size_t steps_applied = 0;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Sample-weighted loss and accuracy over the whole dataset.
Evaluation evaluate(const NetworkSpec& spec, const ParameterVector& w, const Dataset& d, std::size_t batch_size);

TrainingResult train(const TrainingConfig& config, const Dataset& train_set, const Dataset& val_set);

struct SeedRun {
  std::uint64_t seed = 0;
  std::optional<TrainingResult> result;
  std::string error;
};

/// One independent run per seed. `jobs` > 1 runs seeds on worker threads;
/// output is identical to sequential execution.
std::vector<SeedRun> multi_seed(const TrainingConfig& config, const std::vector<std::uint64_t>& seeds,
                                const Dataset& train_set, const Dataset& val_set, std::size_t jobs = 1);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& log, const TrainingConfig& config);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& log,
                       const TrainingConfig& config);

/// Header plus one row per successful run: seed, final val loss/accuracy, best val accuracy, best epoch.
void write_summary_csv(std::ostream& out, const std::vector<SeedRun>& runs);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SeedRun>& runs);

/// Resolved config and run facts as JSON.
std::string run_metadata_json(const TrainingConfig& config, const TrainingResult& result);

}  // namespace sgdsa
