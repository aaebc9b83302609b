#pragma once

// Central finite-difference check of loss_and_gradient.

#include <cstddef>
#include <vector>

#include "sgdsa/nn.hpp"

namespace sgdsa {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_coordinate = 0;
  std::size_t coordinates_checked = 0;
};

/// Relative error per coordinate is |bp - fd| / max(|bp|, |fd|, 1e-6).
/// An empty `coordinates` list checks every parameter.
GradCheckReport check_gradient(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch,
                               double step = 1e-5, const std::vector<std::size_t>& coordinates = {});

}  // namespace sgdsa
