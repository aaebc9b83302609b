#include "sgdsa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sgdsa/kernels.hpp"

namespace sgdsa {
namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string_view optimizer_name(OptimizerKind kind) noexcept {
  switch (kind) {
    case OptimizerKind::sgd:
      return "sgd";
    case OptimizerKind::sgd_sa:
      return "sgd-sa";
    case OptimizerKind::ssa:
      return "ssa";
  }
  return "unknown";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "sgd-sa" || name == "sgd_sa") return OptimizerKind::sgd_sa;
  if (name == "ssa") return OptimizerKind::ssa;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected sgd, sgd-sa or ssa)");
}

std::string_view cooling_name(CoolingPer per) noexcept { return per == CoolingPer::epoch ? "epoch" : "iteration"; }

CoolingPer parse_cooling(std::string_view name) {
  if (name == "epoch") return CoolingPer::epoch;
  if (name == "iteration") return CoolingPer::iteration;
  throw std::invalid_argument("unknown cooling mode '" + std::string(name) + "' (expected epoch or iteration)");
}

void TrainingConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("val fraction must lie in (0,1)");
  for (std::size_t h : hidden_layers) {
    if (h == 0) throw std::invalid_argument("hidden layer widths must be positive");
  }
  switch (optimizer) {
    case OptimizerKind::sgd:
      if (schedule.total_epochs() < epochs) {
        throw std::invalid_argument("learning-rate schedule covers " + std::to_string(schedule.total_epochs()) +
                                    " epochs but " + std::to_string(epochs) + " were requested");
      }
      break;
    case OptimizerKind::ssa:
      if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be >= 0");
      [[fallthrough]];
    case OptimizerKind::sgd_sa:
      CoolingState(t0, alpha);
      break;
  }
}

std::string TrainingConfig::describe() const {
  std::ostringstream s;
  s << "optimizer=" << optimizer_name(optimizer) << " epochs=" << epochs << " batch_size=" << batch_size
    << " seed=" << seed << " hidden=";
  for (std::size_t i = 0; i < hidden_layers.size(); ++i) s << (i ? "," : "") << hidden_layers[i];
  s << " activation=" << activation_name(activation) << " val_fraction=" << fmt_real(val_fraction)
    << " split_seed=" << split_seed << " standardize=" << (standardize ? 1 : 0);
  switch (optimizer) {
    case OptimizerKind::sgd:
      s << " schedule=";
      for (std::size_t i = 0; i < schedule.spans().size(); ++i) {
        s << (i ? "," : "") << schedule.spans()[i].epochs << ":" << fmt_real(schedule.spans()[i].rate);
      }
      break;
    case OptimizerKind::sgd_sa:
      s << " t0=" << fmt_real(t0) << " alpha=" << fmt_real(alpha) << " cooling=" << cooling_name(cooling_per)
        << " lr_set=";
      for (std::size_t i = 0; i < lr_set.size(); ++i) s << (i ? "," : "") << fmt_real(lr_set[i]);
      break;
    case OptimizerKind::ssa:
      s << " t0=" << fmt_real(t0) << " alpha=" << fmt_real(alpha) << " cooling=" << cooling_name(cooling_per)
        << " epsilon=" << fmt_real(epsilon);
      break;
  }
  return s.str();
}

NetworkSpec TrainingConfig::network_for(std::size_t feature_count, std::size_t class_count) const {
  NetworkSpec spec;
  spec.layer_sizes.push_back(feature_count);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden_layers.begin(), hidden_layers.end());
  spec.layer_sizes.push_back(class_count);
  spec.activation = activation;
  spec.validate();
  return spec;
}

Evaluation evaluate(const NetworkSpec& spec, const ParameterVector& w, const Dataset& d, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (d.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
  double loss_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t start = 0; start < d.size(); start += batch_size) {
    const std::size_t stop = std::min(d.size(), start + batch_size);
    std::vector<double> rows(d.features.data.begin() + static_cast<std::ptrdiff_t>(start * d.feature_count()),
                             d.features.data.begin() + static_cast<std::ptrdiff_t>(stop * d.feature_count()));
    const Matrix logits = forward(spec, w, Matrix(stop - start, d.feature_count(), std::move(rows)));
    const std::span<const std::size_t> labels(d.labels.data() + start, stop - start);
    loss_sum += loss(logits, labels) * static_cast<double>(stop - start);
    hits += correct_count(logits, labels);
  }
  const auto n = static_cast<double>(d.size());
  return {loss_sum / n, static_cast<double>(hits) / n};
}

TrainingResult train(const TrainingConfig& config, const Dataset& train_set, const Dataset& val_set) {
  config.validate();
  if (train_set.size() == 0 || val_set.size() == 0) throw std::invalid_argument("training and validation sets must be non-empty");
  if (train_set.feature_count() != val_set.feature_count() || train_set.class_count != val_set.class_count) {
    throw std::invalid_argument("training and validation sets disagree on feature count or class count");
  }

  const NetworkSpec spec = config.network_for(train_set.feature_count(), train_set.class_count);
  const NetworkObjective objective(spec);
  const RngState master = RngState::new_master(config.seed);
  RngState rng_init = master.substream(Purpose::init);
  RngState rng_lr = master.substream(Purpose::lr_pick);
  RngState rng_accept = master.substream(Purpose::accept);
  RngState rng_direction = master.substream(Purpose::ssa_direction);
  const bool annealed = config.optimizer != OptimizerKind::sgd;
  // SGD never reads the temperature; use a valid placeholder.
  CoolingState cooling = annealed ? CoolingState(config.t0, config.alpha) : CoolingState(1.0, 0.5);

  TrainingResult result;
  ParameterVector w = init_weights(spec, rng_init);
  result.best.spec = spec;
  result.best.config_digest = config.digest();
  result.log.reserve(config.epochs);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    MetricsRecord rec;
    rec.epoch = epoch;
    if (config.optimizer == OptimizerKind::sgd_sa) rec.eta_histogram.assign(config.lr_set.size(), 0);

    const auto batches = minibatches(train_set, config.batch_size, epoch, master);
    double loss_sum = 0.0;
    double prob_sum = 0.0;
    std::size_t hits = 0;
    for (const Minibatch& batch : batches) {
      try {
        if (config.optimizer == OptimizerKind::sgd) {
          LossGradient lg = objective.loss_and_gradient(w, batch);
          loss_sum += lg.loss * static_cast<double>(batch.size());
          hits += lg.correct;
          w = sgd_step(w, lg.gradient, scheduled_lr(epoch, config.schedule));
          ++result.steps_attempted;
          ++result.steps_applied;
          continue;
        }
        StepResult step = config.optimizer == OptimizerKind::sgd_sa
                              ? sgdsa_step(objective, w, batch, config.lr_set, cooling, rng_lr, rng_accept)
                              : ssa_step(objective, w, batch, config.epsilon, cooling, rng_direction, rng_accept);
        const StepOutcome& out = step.outcome;
        loss_sum += out.loss_before * static_cast<double>(batch.size());
        hits += out.correct_before;
        prob_sum += out.decision.probability;
        if (out.decision.worsening <= 0.0) {
          ++rec.improving_moves;
        } else if (out.decision.accepted) {
          ++rec.accepted_worsening_moves;
        } else {
          ++rec.rejected_moves;
        }
        if (config.optimizer == OptimizerKind::sgd_sa) ++rec.eta_histogram[out.eta_index];
        result.decisions.push_back(out.decision.accepted ? '1' : '0');
        ++result.steps_attempted;
        if (out.weights_changed) ++result.steps_applied;
        w = std::move(step.weights);
        if (config.cooling_per == CoolingPer::iteration) cooling.cool();
      } catch (const std::exception& e) {
        throw std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch.batch_index) +
                                 ": " + e.what());
      }
    }
    if (annealed && config.cooling_per == CoolingPer::epoch) cooling.cool();

    const auto n_train = static_cast<double>(train_set.size());
    rec.train_loss = loss_sum / n_train;
    rec.train_accuracy = static_cast<double>(hits) / n_train;
    const Evaluation val = evaluate(spec, w, val_set, config.batch_size);
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    if (annealed) {
      rec.temperature = cooling.current();
      rec.mean_accept_prob_clipped = prob_sum / static_cast<double>(batches.size());
    } else {
      rec.temperature = 0.0;
      rec.mean_accept_prob_clipped = 1.0;
    }

    if (epoch == 1 || rec.val_accuracy > result.best.val_accuracy) {
      result.best.weights = w;
      result.best.epoch = static_cast<std::uint32_t>(epoch);
      result.best.val_accuracy = rec.val_accuracy;
    }
    result.log.push_back(std::move(rec));
  }
  result.final_weights = std::move(w);
  return result;
}

std::vector<SeedRun> multi_seed(const TrainingConfig& config, const std::vector<std::uint64_t>& seeds,
                                const Dataset& train_set, const Dataset& val_set, std::size_t jobs) {
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  std::vector<SeedRun> runs(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      TrainingConfig cfg = config;
      cfg.seed = seeds[i];
      runs[i].seed = seeds[i];
      try {
        runs[i].result = train(cfg, train_set, val_set);
      } catch (const std::exception& e) {
        runs[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, seeds.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return runs;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& log, const TrainingConfig& config) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc,temperature,mean_accept_prob,n_improving,n_accepted_worsening,"
         "n_rejected";
  const bool with_eta = config.optimizer == OptimizerKind::sgd_sa;
  if (with_eta) {
    for (double rate : config.lr_set.rates()) out << ",eta_" << fmt_short(rate);
  }
  out << '\n';
  for (const auto& r : log) {
    out << r.epoch << ',' << fmt_real(r.train_loss) << ',' << fmt_real(r.train_accuracy) << ',' << fmt_real(r.val_loss)
        << ',' << fmt_real(r.val_accuracy) << ',' << fmt_real(r.temperature) << ','
        << fmt_real(r.mean_accept_prob_clipped) << ',' << r.improving_moves << ',' << r.accepted_worsening_moves << ','
        << r.rejected_moves;
    if (with_eta) {
      for (std::size_t c : r.eta_histogram) out << ',' << c;
    }
    out << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& log,
                       const TrainingConfig& config) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_metrics_csv(file, log, config);
}

void write_summary_csv(std::ostream& out, const std::vector<SeedRun>& runs) {
  out << "seed,final_val_loss,final_val_accuracy,best_val_accuracy,best_epoch\n";
  for (const auto& run : runs) {
    if (!run.result || run.result->log.empty()) continue;
    const auto& last = run.result->log.back();
    out << run.seed << ',' << fmt_real(last.val_loss) << ',' << fmt_real(last.val_accuracy) << ','
        << fmt_real(run.result->best.val_accuracy) << ',' << run.result->best.epoch << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SeedRun>& runs) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_summary_csv(file, runs);
}

std::string run_metadata_json(const TrainingConfig& config, const TrainingResult& result) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["config"] = config.describe();
  j["config_digest"] = result.best.config_digest;
  j["optimizer"] = optimizer_name(config.optimizer);
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["seed"] = config.seed;
  j["split_seed"] = config.split_seed;
  j["val_fraction"] = config.val_fraction;
  j["standardize"] = config.standardize;
  j["hidden_layers"] = config.hidden_layers;
  j["activation"] = activation_name(config.activation);
  j["layer_sizes"] = result.best.spec.layer_sizes;
  if (config.optimizer == OptimizerKind::sgd) {
    nlohmann::ordered_json spans = nlohmann::ordered_json::array();
    for (const auto& s : config.schedule.spans()) spans.push_back({{"epochs", s.epochs}, {"rate", s.rate}});
    j["schedule"] = spans;
  } else {
    j["t0"] = config.t0;
    j["alpha"] = config.alpha;
    j["cooling_per"] = cooling_name(config.cooling_per);
    if (config.optimizer == OptimizerKind::sgd_sa) j["lr_set"] = config.lr_set.rates();
    if (config.optimizer == OptimizerKind::ssa) j["epsilon"] = config.epsilon;
  }
  j["simd_backend"] = kernels::backend_name(kernels::active_backend());
  j["steps_attempted"] = result.steps_attempted;
  j["steps_applied"] = result.steps_applied;
  j["best_epoch"] = result.best.epoch;
  j["best_val_accuracy"] = result.best.val_accuracy;
  j["metrics_notes"] = {
      {"train_loss", "sample-weighted mean of pre-step minibatch losses over the epoch"},
      {"train_acc", "fraction of training samples classified correctly at their pre-step point"},
      {"temperature", "temperature after the end-of-epoch cooling"},
      {"mean_accept_prob", "mean over the epoch's steps of min(1, exp(-worsening/T))"},
      {"batch_advance", "every decision, accepted or rejected, moves on to the next minibatch"},
  };
  return j.dump(2) + "\n";
}

}  // namespace sgdsa
