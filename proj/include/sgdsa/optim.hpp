#pragma once

// Optimizer steps: plain SGD, SGD with annealed learning-rate moves, and the
// derivative-free two-sided random-direction annealer.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sgdsa/anneal.hpp"
#include "sgdsa/matrix.hpp"
#include "sgdsa/nn.hpp"
#include "sgdsa/rng.hpp"

namespace sgdsa {

/// Objective evaluated on a minibatch. The network loss is the production
/// implementation; tests plug in analytic functions and call counters.
class Objective {
 public:
  struct BatchEval {
    double loss = 0.0;
    std::size_t correct = 0;
  };

  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual BatchEval evaluate(const ParameterVector& w, const Minibatch& batch) const = 0;
  virtual LossGradient loss_and_gradient(const ParameterVector& w, const Minibatch& batch) const = 0;
};

class NetworkObjective final : public Objective {
 public:
  explicit NetworkObjective(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t dimension() const override { return parameter_count_; }
  BatchEval evaluate(const ParameterVector& w, const Minibatch& batch) const override;
  LossGradient loss_and_gradient(const ParameterVector& w, const Minibatch& batch) const override;

 private:
  NetworkSpec spec_;
  std::size_t parameter_count_;
};

/// The candidate set H: non-empty, positive, finite, no duplicates. Order is
/// kept; it fixes which index each rate gets in the eta histogram.
class LearningRateSet {
 public:
  explicit LearningRateSet(std::vector<double> rates);
  LearningRateSet(std::initializer_list<double> rates) : LearningRateSet(std::vector<double>(rates)) {}

  /// {0.9, 0.8, ..., 0.1, 0.09, ..., 0.05}
  static LearningRateSet standard();

  std::size_t size() const noexcept { return rates_.size(); }
  double operator[](std::size_t i) const { return rates_.at(i); }
  const std::vector<double>& rates() const noexcept { return rates_; }

 private:
  std::vector<double> rates_;
};

struct ScheduleSpan {
  std::size_t epochs = 0;
  double rate = 0.0;
};

/// Piecewise-constant learning rate over consecutive epoch spans.
class LearningRateSchedule {
 public:
  explicit LearningRateSchedule(std::vector<ScheduleSpan> spans);

  /// 0.1 x 30 epochs, 0.01 x 40, 0.001 x 30.
  static LearningRateSchedule standard();

  std::size_t total_epochs() const noexcept;
  const std::vector<ScheduleSpan>& spans() const noexcept { return spans_; }

 private:
  std::vector<ScheduleSpan> spans_;
};

/// Rate for a 1-based epoch; throws std::out_of_range past the last span.
double scheduled_lr(std::size_t epoch, const LearningRateSchedule& schedule);

/// w - eta * grad. Input left untouched.
ParameterVector sgd_step(const ParameterVector& w, const GradientVector& grad, double eta);

struct StepOutcome {
  /// Chosen learning rate (SGD-SA) or direction scale epsilon (SSA).
  double eta_used = 0.0;
  /// Index of eta_used in H; 0 for SSA.
  std::size_t eta_index = 0;
  double loss_before = 0.0;
  /// Loss of the candidate point, accepted or not.
  double loss_after = 0.0;
  /// Correct predictions at the pre-step point on this batch.
  std::size_t correct_before = 0;
  AcceptanceDecision decision;
  bool weights_changed = false;
};

struct StepResult {
  ParameterVector weights;
  StepOutcome outcome;
};

/// One annealed SGD move: gradient at w on the batch, random eta from H,
/// candidate w - eta * grad evaluated on the same batch, Metropolis decision.
StepResult sgdsa_step(const Objective& objective, const ParameterVector& w, const Minibatch& batch,
                      const LearningRateSet& rates, const CoolingState& cooling, RngState& rng_lr, RngState& rng_accept);
StepResult sgdsa_step(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch,
                      const LearningRateSet& rates, const CoolingState& cooling, RngState& rng_lr, RngState& rng_accept);

/// One derivative-free move: Gaussian direction d, candidates w - eps*d and
/// w + eps*d, the lower-loss one (ties -> w - eps*d) goes to the Metropolis test.
StepResult ssa_step(const Objective& objective, const ParameterVector& w, const Minibatch& batch, double epsilon,
                    const CoolingState& cooling, RngState& rng_direction, RngState& rng_accept);
StepResult ssa_step(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch, double epsilon,
                    const CoolingState& cooling, RngState& rng_direction, RngState& rng_accept);

}  // namespace sgdsa
