#pragma once

#include <vector>

#include "reofilm/discretization.hpp"

namespace reofilm {

/// Integral and extremal diagnostics of a film state. `momentum` is
/// sum(eta * vel) dx, so for the EtaE family it is taken over E.
struct Diagnostics {
  double mass = 0.0;
  double momentum = 0.0;
  double max_eta = 0.0;
  double max_abs_u = 0.0;
  double dt_last = 0.0;

  bool operator==(const Diagnostics&) const = default;
};

Diagnostics compute_diagnostics(const FilmState& state, const Grid& grid, double dt_last);

/// Timestamped snapshot written to output streams.
struct SimRecord {
  double time = 0.0;
  std::vector<double> eta;
  std::vector<double> vel;
  Diagnostics diagnostics;

  bool operator==(const SimRecord&) const = default;
};

SimRecord make_record(const FilmState& state, const Grid& grid, double dt_last);

}  // namespace reofilm
