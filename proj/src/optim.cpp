#include "sgdsa/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sgdsa/kernels.hpp"

namespace sgdsa {

NetworkObjective::NetworkObjective(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  parameter_count_ = spec_.parameter_count();
}

Objective::BatchEval NetworkObjective::evaluate(const ParameterVector& w, const Minibatch& batch) const {
  if (batch.size() == 0) throw std::invalid_argument("empty minibatch");
  const Matrix logits = forward(spec_, w, batch.inputs);
  return {loss(logits, batch.targets), correct_count(logits, batch.targets)};
}

LossGradient NetworkObjective::loss_and_gradient(const ParameterVector& w, const Minibatch& batch) const {
  return sgdsa::loss_and_gradient(spec_, w, batch);
}

LearningRateSet::LearningRateSet(std::vector<double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw std::invalid_argument("learning-rate set is empty");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!(rates_[i] > 0.0) || !std::isfinite(rates_[i])) {
      throw std::invalid_argument("learning rate " + std::to_string(rates_[i]) + " is not a positive finite number");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (rates_[j] == rates_[i]) throw std::invalid_argument("duplicate learning rate " + std::to_string(rates_[i]));
    }
  }
}

LearningRateSet LearningRateSet::standard() {
  return LearningRateSet{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.09, 0.08, 0.07, 0.06, 0.05};
}

LearningRateSchedule::LearningRateSchedule(std::vector<ScheduleSpan> spans) : spans_(std::move(spans)) {
  if (spans_.empty()) throw std::invalid_argument("learning-rate schedule is empty");
  for (const auto& s : spans_) {
    if (s.epochs == 0) throw std::invalid_argument("schedule span must cover at least one epoch");
    if (!(s.rate > 0.0) || !std::isfinite(s.rate)) throw std::invalid_argument("schedule rates must be positive");
  }
}

LearningRateSchedule LearningRateSchedule::standard() { return LearningRateSchedule({{30, 0.1}, {40, 0.01}, {30, 0.001}}); }

std::size_t LearningRateSchedule::total_epochs() const noexcept {
  std::size_t total = 0;
  for (const auto& s : spans_) total += s.epochs;
  return total;
}

double scheduled_lr(std::size_t epoch, const LearningRateSchedule& schedule) {
  if (epoch == 0) throw std::out_of_range("epochs are numbered from 1");
  std::size_t end = 0;
  for (const auto& s : schedule.spans()) {
    end += s.epochs;
    if (epoch <= end) return s.rate;
  }
  throw std::out_of_range("epoch " + std::to_string(epoch) + " is beyond the schedule (" + std::to_string(end) +
                          " epochs)");
}

ParameterVector sgd_step(const ParameterVector& w, const GradientVector& grad, double eta) {
  if (w.size() != grad.size()) {
    throw std::invalid_argument("gradient length " + std::to_string(grad.size()) + " does not match parameters " +
                                std::to_string(w.size()));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("learning rate must be positive and finite");
  ParameterVector out{std::vector<double>(w.size())};
  kernels::sub_scaled(w.values, grad.values, eta, out.values);
  return out;
}

StepResult sgdsa_step(const Objective& objective, const ParameterVector& w, const Minibatch& batch,
                      const LearningRateSet& rates, const CoolingState& cooling, RngState& rng_lr,
                      RngState& rng_accept) {
  LossGradient current = objective.loss_and_gradient(w, batch);

  StepOutcome outcome;
  outcome.eta_index = rng_lr.choice(rates.size());
  outcome.eta_used = rates[outcome.eta_index];
  outcome.loss_before = current.loss;
  outcome.correct_before = current.correct;

  ParameterVector candidate = sgd_step(w, current.gradient, outcome.eta_used);
  outcome.loss_after = objective.evaluate(candidate, batch).loss;
  outcome.decision = decide(outcome.loss_after - outcome.loss_before, cooling, rng_accept);
  outcome.weights_changed = outcome.decision.accepted;

  return {outcome.decision.accepted ? std::move(candidate) : w, outcome};
}

StepResult sgdsa_step(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch,
                      const LearningRateSet& rates, const CoolingState& cooling, RngState& rng_lr,
                      RngState& rng_accept) {
  return sgdsa_step(NetworkObjective(spec), w, batch, rates, cooling, rng_lr, rng_accept);
}

StepResult ssa_step(const Objective& objective, const ParameterVector& w, const Minibatch& batch, double epsilon,
                    const CoolingState& cooling, RngState& rng_direction, RngState& rng_accept) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be >= 0 and finite");
  if (w.size() != objective.dimension()) throw std::invalid_argument("parameter vector does not match the objective");

  std::vector<double> direction(w.size());
  for (auto& d : direction) d = rng_direction.normal();

  const Objective::BatchEval here = objective.evaluate(w, batch);

  ParameterVector minus{std::vector<double>(w.size())};
  ParameterVector plus{std::vector<double>(w.size())};
  kernels::sub_scaled(w.values, direction, epsilon, minus.values);
  kernels::sub_scaled(w.values, direction, -epsilon, plus.values);
  const double loss_minus = objective.evaluate(minus, batch).loss;
  const double loss_plus = objective.evaluate(plus, batch).loss;
  const bool take_minus = loss_minus <= loss_plus;

  StepOutcome outcome;
  outcome.eta_used = epsilon;
  outcome.loss_before = here.loss;
  outcome.correct_before = here.correct;
  outcome.loss_after = take_minus ? loss_minus : loss_plus;
  outcome.decision = decide(outcome.loss_after - outcome.loss_before, cooling, rng_accept);
  outcome.weights_changed = outcome.decision.accepted;

  if (!outcome.decision.accepted) return {w, outcome};
  return {take_minus ? std::move(minus) : std::move(plus), outcome};
}

StepResult ssa_step(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch, double epsilon,
                    const CoolingState& cooling, RngState& rng_direction, RngState& rng_accept) {
  return ssa_step(NetworkObjective(spec), w, batch, epsilon, cooling, rng_direction, rng_accept);
}

}  // namespace sgdsa
