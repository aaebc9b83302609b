#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "sgdsa/optim.hpp"

using namespace sgdsa;

namespace {

// f(w) = 0.5 * sum c_i (w_i - t_i)^2, independent of the batch contents.
class Quadratic final : public Objective {
 public:
  Quadratic(std::vector<double> curvature, std::vector<double> target)
      : c_(std::move(curvature)), t_(std::move(target)) {}
  std::size_t dimension() const override { return c_.size(); }
  double value(const std::vector<double>& w) const {
    double f = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) f += 0.5 * c_[i] * (w[i] - t_[i]) * (w[i] - t_[i]);
    return f;
  }
  BatchEval evaluate(const ParameterVector& w, const Minibatch& batch) const override {
    ++evaluations;
    seen.push_back(&batch);
    return {value(w.values), 0};
  }
  LossGradient loss_and_gradient(const ParameterVector& w, const Minibatch& batch) const override {
    ++gradients;
    seen.push_back(&batch);
    LossGradient lg;
    lg.loss = value(w.values);
    lg.gradient.values.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) lg.gradient.values[i] = c_[i] * (w.values[i] - t_[i]);
    return lg;
  }
  mutable int evaluations = 0;
  mutable int gradients = 0;
  mutable std::vector<const Minibatch*> seen;

 private:
  std::vector<double> c_, t_;
};

class Constant final : public Objective {
 public:
  explicit Constant(std::size_t n) : n_(n) {}
  std::size_t dimension() const override { return n_; }
  BatchEval evaluate(const ParameterVector&, const Minibatch&) const override { return {1.0, 0}; }
  LossGradient loss_and_gradient(const ParameterVector&, const Minibatch&) const override {
    ++gradients;
    return {1.0, GradientVector{std::vector<double>(n_, 0.0)}, 0};
  }
  mutable int gradients = 0;

 private:
  std::size_t n_;
};

Minibatch dummy_batch() {
  Minibatch mb;
  mb.inputs = Matrix(1, 1);
  mb.targets = {0};
  return mb;
}

bool bitwise_equal(const ParameterVector& a, const ParameterVector& b) {
  return a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("sgd_step worked example and errors") {
  const auto w = sgd_step(ParameterVector{{1.0, 2.0}}, GradientVector{{1.0, -1.0}}, 0.1);
  CHECK(w.values[0] == doctest::Approx(0.9));
  CHECK(w.values[1] == doctest::Approx(2.1));
  CHECK_THROWS_AS(sgd_step(ParameterVector{{1.0}}, GradientVector{{1.0, 2.0}}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(ParameterVector{{1.0}}, GradientVector{{1.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(ParameterVector{{1.0}}, GradientVector{{1.0}}, -0.1), std::invalid_argument);
}

TEST_CASE("sgd_step is linear in eta and gradient") {
  RngState rng = RngState::new_master(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.choice(40);
    ParameterVector w{std::vector<double>(n)};
    GradientVector g{std::vector<double>(n)};
    for (auto& v : w.values) v = rng.normal();
    for (auto& v : g.values) v = rng.normal();
    const double eta = 0.01 + rng.uniform01();
    const auto a = sgd_step(w, g, eta);
    const auto b = sgd_step(w, g, 2 * eta);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a.values[i] == doctest::Approx(w.values[i] - eta * g.values[i]).epsilon(1e-14));
      CHECK(b.values[i] - w.values[i] == doctest::Approx(2 * (a.values[i] - w.values[i])).epsilon(1e-12));
    }
  }
}

TEST_CASE("scheduled learning rate") {
  const auto s = LearningRateSchedule::standard();
  CHECK(s.total_epochs() == 100);
  CHECK(scheduled_lr(1, s) == 0.1);
  CHECK(scheduled_lr(10, s) == 0.1);
  CHECK(scheduled_lr(30, s) == 0.1);
  CHECK(scheduled_lr(31, s) == 0.01);
  CHECK(scheduled_lr(50, s) == 0.01);
  CHECK(scheduled_lr(70, s) == 0.01);
  CHECK(scheduled_lr(71, s) == 0.001);
  CHECK(scheduled_lr(90, s) == 0.001);
  CHECK(scheduled_lr(100, s) == 0.001);
  CHECK_THROWS_AS(scheduled_lr(0, s), std::out_of_range);
  CHECK_THROWS_AS(scheduled_lr(101, s), std::out_of_range);
  CHECK_THROWS_AS(LearningRateSchedule({}), std::invalid_argument);
  CHECK_THROWS_AS(LearningRateSchedule({{0, 0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(LearningRateSchedule({{10, 0.0}}), std::invalid_argument);
}

TEST_CASE("learning rate set") {
  const auto h = LearningRateSet::standard();
  REQUIRE(h.size() == 14);
  CHECK(h[0] == 0.9);
  CHECK(h[8] == 0.1);
  CHECK(h[9] == 0.09);
  CHECK(h[13] == 0.05);
  CHECK_THROWS_AS(LearningRateSet(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(LearningRateSet({0.1, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(LearningRateSet({0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(LearningRateSet({0.1, NAN}), std::invalid_argument);
}

TEST_CASE("sgdsa_step worked example: improving candidate accepted") {
  const Quadratic q({1.0}, {3.0});
  const auto mb = dummy_batch();
  RngState lr = RngState::new_master(1).substream(Purpose::lr_pick);
  RngState acc = RngState::new_master(1).substream(Purpose::accept);
  const auto r = sgdsa_step(q, ParameterVector{{0.0}}, mb, LearningRateSet{0.1}, CoolingState(1.0, 0.8), lr, acc);
  CHECK(r.weights.values[0] == doctest::Approx(0.3));
  CHECK(r.outcome.eta_used == 0.1);
  CHECK(r.outcome.loss_before == doctest::Approx(4.5));
  CHECK(r.outcome.loss_after == doctest::Approx(3.645));
  CHECK(r.outcome.decision.worsening == doctest::Approx(-0.855));
  CHECK(r.outcome.decision.accepted);
  CHECK(r.outcome.weights_changed);
}

TEST_CASE("sgdsa_step: overshooting candidate at high and low temperature") {
  // Curvature 1, eta 2.5: from w=0 the candidate 7.5 overshoots target 3 (f 4.5 -> 10.125).
  const Quadratic q({1.0}, {3.0});
  const auto mb = dummy_batch();
  const ParameterVector w0{{0.0}};

  RngState lr = RngState::new_master(2).substream(Purpose::lr_pick);
  RngState acc = RngState::new_master(2).substream(Purpose::accept);
  int accepted = 0;
  for (int i = 0; i < 200; ++i) {
    const auto r = sgdsa_step(q, w0, mb, LearningRateSet{2.5}, CoolingState(1e9, 0.8), lr, acc);
    CHECK(r.outcome.decision.worsening == doctest::Approx(5.625));
    if (r.outcome.decision.accepted) {
      ++accepted;
      CHECK(r.weights.values[0] == doctest::Approx(7.5));
    }
  }
  CHECK(accepted == 200);

  for (int i = 0; i < 200; ++i) {
    const auto r = sgdsa_step(q, w0, mb, LearningRateSet{2.5}, CoolingState(1e-9, 0.8), lr, acc);
    CHECK_FALSE(r.outcome.decision.accepted);
    CHECK_FALSE(r.outcome.weights_changed);
    CHECK(bitwise_equal(r.weights, w0));
  }
}

TEST_CASE("sgdsa_step evaluates both losses on the same minibatch") {
  const Quadratic q({1.0, 2.0}, {1.0, -1.0});
  const auto mb = dummy_batch();
  RngState lr = RngState::new_master(3).substream(Purpose::lr_pick);
  RngState acc = RngState::new_master(3).substream(Purpose::accept);
  (void)sgdsa_step(q, ParameterVector{{0.0, 0.0}}, mb, LearningRateSet::standard(), CoolingState(1.0, 0.8), lr, acc);
  CHECK(q.gradients == 1);
  CHECK(q.evaluations == 1);
  REQUIRE(q.seen.size() == 2);
  CHECK(q.seen[0] == &mb);
  CHECK(q.seen[1] == &mb);
  CHECK(lr.draws() >= 1);
  CHECK(acc.draws() == 1);
}

TEST_CASE("sgdsa_step picks learning rates uniformly") {
  const Quadratic q({1.0}, {0.0});
  const auto mb = dummy_batch();
  const auto rates = LearningRateSet::standard();
  RngState lr = RngState::new_master(4).substream(Purpose::lr_pick);
  RngState acc = RngState::new_master(4).substream(Purpose::accept);
  std::vector<int> counts(rates.size());
  const int n = 14000;
  for (int i = 0; i < n; ++i) {
    const auto r = sgdsa_step(q, ParameterVector{{1.0}}, mb, rates, CoolingState(1.0, 0.8), lr, acc);
    CHECK(r.outcome.eta_used == rates[r.outcome.eta_index]);
    ++counts[r.outcome.eta_index];
  }
  const double p = 1.0 / 14.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) < 5 * sigma);
}

TEST_CASE("sgdsa_step on a network objective matches the spec overload") {
  NetworkSpec spec{{3, 4, 2}, Activation::relu};
  RngState init = RngState::new_master(5).substream(Purpose::init);
  const auto w = init_weights(spec, init);
  Minibatch mb;
  mb.inputs = Matrix(2, 3, {0.1, 0.2, 0.3, -0.5, 0.0, 0.9});
  mb.targets = {0, 1};
  RngState lr1 = RngState::new_master(5).substream(Purpose::lr_pick), lr2 = lr1;
  RngState acc1 = RngState::new_master(5).substream(Purpose::accept), acc2 = acc1;
  const auto a = sgdsa_step(spec, w, mb, LearningRateSet::standard(), CoolingState(1.0, 0.8), lr1, acc1);
  const auto b = sgdsa_step(NetworkObjective(spec), w, mb, LearningRateSet::standard(), CoolingState(1.0, 0.8), lr2, acc2);
  CHECK(bitwise_equal(a.weights, b.weights));
  CHECK(a.outcome.loss_before == loss(forward(spec, w, mb.inputs), mb.targets));
}

TEST_CASE("ssa_step uses no gradients and prefers w - eps d on ties") {
  const Constant c(4);
  const auto mb = dummy_batch();
  RngState dir = RngState::new_master(6).substream(Purpose::ssa_direction);
  RngState probe = dir;
  RngState acc = RngState::new_master(6).substream(Purpose::accept);
  const ParameterVector w{{1.0, 2.0, 3.0, 4.0}};
  const auto r = ssa_step(c, w, mb, 0.01, CoolingState(1.0, 0.97), dir, acc);
  CHECK(c.gradients == 0);
  CHECK(r.outcome.decision.accepted);
  CHECK(r.outcome.decision.worsening == 0.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.weights.values[i] == doctest::Approx(w.values[i] - 0.01 * probe.normal()));
}

TEST_CASE("ssa_step on a 1-D quadratic improves at low temperature") {
  const Quadratic q({1.0}, {0.0});
  const auto mb = dummy_batch();
  RngState dir = RngState::new_master(7).substream(Purpose::ssa_direction);
  RngState acc = RngState::new_master(7).substream(Purpose::accept);
  ParameterVector w{{2.0}};
  for (int i = 0; i < 100; ++i) {
    const double before = q.value(w.values);
    w = ssa_step(q, w, mb, 0.01, CoolingState(1e-12, 0.97), dir, acc).weights;
    CHECK(q.value(w.values) <= before);
  }
  CHECK(q.value(w.values) < 2.0);
  CHECK(q.gradients == 0);
}

TEST_CASE("ssa_step with zero epsilon leaves weights unchanged") {
  const Quadratic q({1.0, 1.0}, {0.0, 0.0});
  const auto mb = dummy_batch();
  RngState dir = RngState::new_master(8).substream(Purpose::ssa_direction);
  RngState acc = RngState::new_master(8).substream(Purpose::accept);
  const ParameterVector w{{0.5, -0.25}};
  const auto r = ssa_step(q, w, mb, 0.0, CoolingState(1.0, 0.97), dir, acc);
  CHECK(bitwise_equal(r.weights, w));
  CHECK_THROWS_AS(ssa_step(q, w, mb, -0.1, CoolingState(1.0, 0.97), dir, acc), std::invalid_argument);
}
