#include <cmath>
#include <fmt/format.h>

#include "reofilm/analysis.hpp"
#include "reofilm/constants.hpp"
#include "reofilm/errors.hpp"
#include "reofilm/scenarios_io.hpp"

namespace reofilm {

namespace {

// Mean velocity -> prognostic variable of the configured family.
double velocity_variable(const FilmModel& model, double eta, double ubar) {
  if (model.family() != ModelFamily::EtaE) return ubar;
  const auto& pl = *model.power_law();
  return invert_mean_velocity(eta, ubar, model.params(), pl.s, pl.cs);
}

}  // namespace

FilmState build_initial_state(const ScenarioConfig& cfg, const Grid& grid) {
  const auto model = cfg.make_model();
  const auto& ic = cfg.ic;
  const std::size_t n = grid.n();
  FilmState state;
  state.eta.assign(n, ic.eta0);
  state.vel.assign(n, 0.0);

  switch (ic.kind) {
    case InitialKind::Uniform:
      break;
    case InitialKind::GaussianBump:
      for (std::size_t i = 0; i < n; ++i) {
        const double r = (grid.x(i) - ic.center) / ic.width;
        state.eta[i] = ic.eta0 + ic.amplitude * std::exp(-r * r);
      }
      break;
    case InitialKind::DamBreak: {
      const double w = ic.smoothing.value_or(5.0 * grid.dx());
      for (std::size_t i = 0; i < n; ++i) {
        const double step = 0.5 * (1.0 - std::tanh((grid.x(i) - ic.position) / w));
        state.eta[i] = ic.eta_right + (ic.eta0 - ic.eta_right) * step;
      }
      break;
    }
    case InitialKind::EquilibriumPerturbed: {
      const double vel_eq = uniform_equilibrium(model, ic.eta0).ubar_eq;
      for (std::size_t i = 0; i < n; ++i) {
        state.eta[i] = ic.eta0 + ic.amplitude * std::sin(ic.wavenumber * grid.x(i));
      }
      state.vel.assign(n, vel_eq);
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!(state.eta[i] >= kThicknessFloor)) {
      throw ConfigError("ic", fmt::format("thickness {} at cell {} is below the floor {}",
                                          state.eta[i], i, kThicknessFloor));
    }
  }
  if (ic.kind != InitialKind::EquilibriumPerturbed) {
    for (std::size_t i = 0; i < n; ++i) {
      state.vel[i] = velocity_variable(model, state.eta[i], ic.u0);
    }
  }
  return state;
}

}  // namespace reofilm
