#pragma once

#include <functional>

#include "reofilm/constants.hpp"
#include "reofilm/discretization.hpp"
#include "reofilm/errors.hpp"
#include "reofilm/records.hpp"

namespace reofilm {

struct StepControl {
  double cfl = 0.4;
  double dt_max = 1.0;
  double dt_min = 1e-10;
  double t_end = 0.0;
  double output_every = 0.0;  // 0: only the initial and final records
  double eta_floor = kThicknessFloor;
  /// Treat bed drag and gravity implicitly, cell by cell (Lie splitting).
  bool implicit_drag = false;
  FluxScheme flux_scheme = FluxScheme::Central;

  void validate() const;
};

/// Thrown when the integrator cannot continue; carries the last accepted state.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, FilmState snapshot)
      : Error(what), snapshot_(std::move(snapshot)) {}

  const FilmState& snapshot() const noexcept { return snapshot_; }

 private:
  FilmState snapshot_;
};

/// |d(drag rate)/d(vel)| at one cell, by a one-sided difference in |vel|
/// floored at the shear-rate floor.
double drag_stiffness(const FilmModel& model, double eta, double vel);

/// cfl * min over cells of dx / speed and, unless drag is implicit,
/// 1 / drag stiffness; clipped to dt_max.
///
/// Throws StiffnessError if the bound falls below dt_min.
double stable_dt(const FilmState& state, const Grid& grid, const FilmModel& model,
                 const StepControl& control);

using RhsFunction = std::function<Tendency(const FilmState&)>;

/// One classical four-stage Runge-Kutta step. `vel` may be empty.
FilmState rk4_step(const FilmState& state, double dt, const RhsFunction& rhs);

/// Applied to a tentative step result, e.g. the implicit drag solve.
using PostStep = std::function<void(FilmState&, double dt)>;

struct StepResult {
  FilmState state;
  double dt = 0.0;
  int rejections = 0;
};

/// RK4 step followed by `post` and the thickness floor. A step whose floor
/// adds more than 1e-12 of the total mass is rejected and retried at dt/2;
/// going below dt_min throws SimulationError with the input state.
StepResult positivity_preserving_step(const FilmState& state, double dt,
                                      const StepControl& control, const RhsFunction& rhs,
                                      const PostStep& post = {});

/// Backward-Euler solve of the relaxation terms (bed drag and gravity) at one
/// cell: finds v with v - dt * relaxation(p with vel = v) = v_star. Only
/// p.eta and p.deta_dx are used from `p`.
double solve_implicit_relaxation(const FilmModel& model, const PointState& p, double v_star,
                                 double dt);

using Observer = std::function<void(const SimRecord&)>;

/// Generic driver: advances `state` to control.t_end, calling `observer` at
/// the start, every output_every, and at the end.
FilmState integrate_system(FilmState state, const Grid& grid, const StepControl& control,
                           const RhsFunction& rhs,
                           const std::function<double(const FilmState&)>& dt_bound,
                           const PostStep& post, const Observer& observer);

/// Integrates `model` on `grid`. Deterministic for identical inputs.
FilmState integrate(FilmState state0, const Grid& grid, const FilmModel& model,
                    const StepControl& control, const Observer& observer = {});

/// One complete step of `model` (including the implicit relaxation when enabled).
StepResult advance(const FilmState& state, double dt, const Grid& grid, const FilmModel& model,
                   const StepControl& control);

}  // namespace reofilm
