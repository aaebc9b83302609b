#pragma once

// Metropolis acceptance and geometric cooling.

#include <cstdint>

#include "sgdsa/rng.hpp"

namespace sgdsa {

class CoolingState {
 public:
  /// Throws std::invalid_argument unless t0 > 0 and 0 < alpha < 1.
  CoolingState(double t0, double alpha);

  double t0() const noexcept { return t0_; }
  double alpha() const noexcept { return alpha_; }
  double current() const noexcept { return current_; }
  std::uint64_t epochs_cooled() const noexcept { return cooled_; }

  /// T <- alpha * T.
  [[nodiscard]] CoolingState cooled() const noexcept;
  void cool() noexcept;

 private:
  double t0_;
  double alpha_;
  double current_;
  std::uint64_t cooled_ = 0;
};

struct AcceptanceDecision {
  double worsening = 0.0;
  /// e^(-worsening/T) without clipping; may exceed 1 for improving moves.
  double raw_probability = 1.0;
  /// min(1, raw_probability).
  double probability = 1.0;
  double draw = 0.0;
  bool accepted = true;
};

/// Metropolis probability: 1 when worsening <= 0, else e^(-worsening/T).
/// Results below the smallest normal double are flushed to 0.
double acceptance_probability(double worsening, double temperature);

/// Unclipped e^(-worsening/T) as written in the acceptance step; the
/// decision compares the draw against this value.
double raw_acceptance_probability(double worsening, double temperature);

/// Always consumes exactly one uniform01 draw from `rng`.
AcceptanceDecision decide(double worsening, const CoolingState& cooling, RngState& rng);

}  // namespace sgdsa
