#include "sgdsa/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sgdsa {
namespace {

void check_inputs(double worsening, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite, got " + std::to_string(temperature));
  }
  if (!std::isfinite(worsening)) throw std::invalid_argument("worsening must be finite");
}

}  // namespace

CoolingState::CoolingState(double t0, double alpha) : t0_(t0), alpha_(alpha), current_(t0) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("initial temperature t0 must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cooling factor alpha must lie in (0,1)");
}

CoolingState CoolingState::cooled() const noexcept {
  CoolingState next = *this;
  next.cool();
  return next;
}

void CoolingState::cool() noexcept {
  const double next = alpha_ * current_;
  // Never reach zero.
  current_ = next > 0.0 ? next : std::numeric_limits<double>::denorm_min();
  ++cooled_;
}

double raw_acceptance_probability(double worsening, double temperature) {
  check_inputs(worsening, temperature);
  const double p = std::exp(-worsening / temperature);
  return p < std::numeric_limits<double>::min() ? 0.0 : p;
}

double acceptance_probability(double worsening, double temperature) {
  check_inputs(worsening, temperature);
  if (worsening <= 0.0) return 1.0;
  return raw_acceptance_probability(worsening, temperature);
}

AcceptanceDecision decide(double worsening, const CoolingState& cooling, RngState& rng) {
  AcceptanceDecision d;
  d.worsening = worsening;
  d.raw_probability = raw_acceptance_probability(worsening, cooling.current());
  d.probability = std::min(1.0, d.raw_probability);
  d.draw = rng.uniform01();
  d.accepted = worsening <= 0.0 || d.draw < d.raw_probability;
  return d;
}

}  // namespace sgdsa
