#include "sgdsa/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sgdsa {

GradCheckReport check_gradient(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch, double step,
                               const std::vector<std::size_t>& coordinates) {
  const LossGradient analytic = loss_and_gradient(spec, w, batch);
  std::vector<std::size_t> coords = coordinates;
  if (coords.empty()) {
    coords.resize(w.size());
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = k;
  }
  GradCheckReport report;
  ParameterVector probe = w;
  for (std::size_t k : coords) {
    const double saved = probe.values.at(k);
    probe.values[k] = saved + step;
    const double up = loss(forward(spec, probe, batch.inputs), batch.targets);
    probe.values[k] = saved - step;
    const double down = loss(forward(spec, probe, batch.inputs), batch.targets);
    probe.values[k] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double exact = analytic.gradient.values[k];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
    const double rel = std::abs(exact - numeric) / denom;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_coordinate = k;
    }
    ++report.coordinates_checked;
  }
  return report;
}

}  // namespace sgdsa
