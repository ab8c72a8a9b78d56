#include "reofilm/timestepping.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace reofilm {

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError(fmt::format("cfl = {} must lie in (0, 1]", cfl));
  if (!(dt_min > 0.0) || !(dt_min < dt_max)) {
    throw DomainError(fmt::format("need 0 < dt_min < dt_max (got {}, {})", dt_min, dt_max));
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw DomainError(fmt::format("t_end = {} must be >= 0", t_end));
  }
  if (!(output_every >= 0.0)) {
    throw DomainError(fmt::format("output_every = {} must be >= 0", output_every));
  }
  if (!(eta_floor > 0.0)) throw DomainError("eta_floor must be > 0");
}

double drag_stiffness(const FilmModel& model, double eta, double vel) {
  const double direction = vel < 0.0 ? -1.0 : 1.0;
  const double mag = std::max(std::abs(vel), eta * kShearRateFloor / std::sqrt(2.0));
  const double rel = 1e-6;
  auto relax = [&](double v) { return model.rhs({eta, v, 0.0, 0.0}).momentum.relaxation(); };
  const double lo = relax(direction * mag);
  const double hi = relax(direction * mag * (1.0 + rel));
  return std::abs(hi - lo) / (mag * rel);
}

double stable_dt(const FilmState& state, const Grid& grid, const FilmModel& model,
                 const StepControl& control) {
  const double inf = std::numeric_limits<double>::infinity();
  double bound = inf;
  for (std::size_t i = 0; i < state.eta.size(); ++i) {
    const double speed = characteristic_speed(model, state.eta[i], state.vel[i]);
    if (speed > 0.0) bound = std::min(bound, grid.dx() / speed);
    if (!control.implicit_drag) {
      const double k = drag_stiffness(model, state.eta[i], state.vel[i]);
      if (k > 0.0) bound = std::min(bound, 1.0 / k);
    }
  }
  if (bound == inf) return control.dt_max;
  const double dt = control.cfl * bound;
  if (dt < control.dt_min) {
    throw StiffnessError(fmt::format(
        "stable step {} is below dt_min {}; reduce gamma, raise Re, or enable implicit drag", dt,
        control.dt_min));
  }
  return std::min(dt, control.dt_max);
}

namespace {

void axpy(std::vector<double>& out, const std::vector<double>& base, double a,
          const std::vector<double>& k) {
  out.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + a * k[i];
}

bool all_finite(const FilmState& s) {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(s.eta.begin(), s.eta.end(), finite) &&
         std::all_of(s.vel.begin(), s.vel.end(), finite);
}

}  // namespace

FilmState rk4_step(const FilmState& state, double dt, const RhsFunction& rhs) {
  const Tendency k1 = rhs(state);
  FilmState stage{{}, {}, state.time + 0.5 * dt};
  axpy(stage.eta, state.eta, 0.5 * dt, k1.deta);
  axpy(stage.vel, state.vel, 0.5 * dt, k1.dvel);
  const Tendency k2 = rhs(stage);
  axpy(stage.eta, state.eta, 0.5 * dt, k2.deta);
  axpy(stage.vel, state.vel, 0.5 * dt, k2.dvel);
  const Tendency k3 = rhs(stage);
  stage.time = state.time + dt;
  axpy(stage.eta, state.eta, dt, k3.deta);
  axpy(stage.vel, state.vel, dt, k3.dvel);
  const Tendency k4 = rhs(stage);

  FilmState out{state.eta, state.vel, state.time + dt};
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.eta.size(); ++i) {
    out.eta[i] += w * (k1.deta[i] + 2.0 * k2.deta[i] + 2.0 * k3.deta[i] + k4.deta[i]);
  }
  for (std::size_t i = 0; i < out.vel.size(); ++i) {
    out.vel[i] += w * (k1.dvel[i] + 2.0 * k2.dvel[i] + 2.0 * k3.dvel[i] + k4.dvel[i]);
  }
  return out;
}

StepResult positivity_preserving_step(const FilmState& state, double dt,
                                      const StepControl& control, const RhsFunction& rhs,
                                      const PostStep& post) {
  double mass = 0.0;
  for (double h : state.eta) mass += h;

  StepResult result;
  for (;;) {
    if (dt < control.dt_min) {
      throw SimulationError(
          fmt::format("step rejected down to dt = {} < dt_min = {} at t = {} (thickness floor "
                      "would inject fluid or the state left the model's domain)",
                      dt, control.dt_min, state.time),
          state);
    }
    FilmState next;
    bool ok = true;
    try {
      next = rk4_step(state, dt, rhs);
    } catch (const ModelError&) {
      ok = false;  // a stage left the admissible domain
    }
    if (ok) ok = all_finite(next);
    if (ok) {
      double added = 0.0;
      for (double& h : next.eta) {
        if (h < control.eta_floor) {
          added += control.eta_floor - h;
          h = control.eta_floor;
        }
      }
      ok = added <= 1e-12 * std::abs(mass);
    }
    if (ok && post) {
      try {
        post(next, dt);
        ok = all_finite(next);
      } catch (const ModelError&) {
        ok = false;
      }
    }
    if (ok) {
      result.state = std::move(next);
      result.dt = dt;
      return result;
    }
    ++result.rejections;
    dt *= 0.5;
  }
}

double solve_implicit_relaxation(const FilmModel& model, const PointState& p, double v_star,
                                 double dt) {
  auto residual = [&](double v) {
    return v - dt * model.rhs({p.eta, v, p.deta_dx, 0.0}).momentum.relaxation() - v_star;
  };
  const double f0 = residual(v_star);
  if (f0 == 0.0) return v_star;

  // Walk away from v_star against the sign of the residual until it flips.
  const double direction = f0 < 0.0 ? 1.0 : -1.0;
  double step = std::max({std::abs(v_star), std::abs(f0), kShearRateFloor});
  double a = v_star, fa = f0;
  double b = v_star + direction * step, fb = residual(b);
  for (int i = 0; fa * fb > 0.0; ++i) {
    if (i > 200) {
      throw ModelError(fmt::format("implicit drag solve found no bracket at eta = {}", p.eta));
    }
    a = b;
    fa = fb;
    step *= 2.0;
    b = v_star + direction * step;
    fb = residual(b);
  }
  if (fb == 0.0) return b;
  if (a > b) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  std::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      residual, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (lo + hi);
}

FilmState integrate_system(FilmState state, const Grid& grid, const StepControl& control,
                           const RhsFunction& rhs,
                           const std::function<double(const FilmState&)>& dt_bound,
                           const PostStep& post, const Observer& observer) {
  control.validate();
  const double t0 = state.time;
  const double t_end = control.t_end;
  double dt_last = 0.0;
  if (observer) observer(make_record(state, grid, dt_last));
  if (!(t_end > t0)) return state;

  const double every = control.output_every > 0.0 ? control.output_every : t_end - t0;
  std::size_t out_index = 1;
  auto next_output = [&] { return std::min(t0 + static_cast<double>(out_index) * every, t_end); };
  const double snap = 1e-12 * std::max(1.0, std::abs(t_end));

  while (state.time < t_end) {
    const double target = next_output();
    double dt = std::min(dt_bound(state), target - state.time);
    auto step = positivity_preserving_step(state, dt, control, rhs, post);
    state = std::move(step.state);
    dt_last = step.dt;
    if (std::abs(state.time - target) <= snap) {
      state.time = target;
      if (observer) observer(make_record(state, grid, dt_last));
      ++out_index;
    }
  }
  return state;
}

namespace {

struct ModelStepParts {
  RhsFunction rhs;
  PostStep post;
};

// References to grid, model and control must outlive the returned callables.
ModelStepParts model_step_parts(const Grid& grid, const FilmModel& model,
                                const StepControl& control) {
  if (!control.implicit_drag) {
    return {[&](const FilmState& s) {
              return assemble_rhs(s, grid, model, control.flux_scheme, TermSelection::All);
            },
            {}};
  }
  return {[&](const FilmState& s) {
            return assemble_rhs(s, grid, model, control.flux_scheme, TermSelection::Inertia);
          },
          [&](FilmState& s, double h) {
            const auto deta_dx = gradient(s.eta, grid, Parity::Even);
            for (std::size_t i = 0; i < s.vel.size(); ++i) {
              s.vel[i] = solve_implicit_relaxation(model, {s.eta[i], s.vel[i], deta_dx[i], 0.0},
                                                   s.vel[i], h);
            }
          }};
}

}  // namespace

StepResult advance(const FilmState& state, double dt, const Grid& grid, const FilmModel& model,
                   const StepControl& control) {
  const auto parts = model_step_parts(grid, model, control);
  return positivity_preserving_step(state, dt, control, parts.rhs, parts.post);
}

FilmState integrate(FilmState state0, const Grid& grid, const FilmModel& model,
                    const StepControl& control, const Observer& observer) {
  if (state0.eta.size() != grid.n() || state0.vel.size() != grid.n()) {
    throw DomainError("initial state does not match the grid");
  }
  const auto parts = model_step_parts(grid, model, control);
  auto bound = [&](const FilmState& s) { return stable_dt(s, grid, model, control); };
  return integrate_system(std::move(state0), grid, control, parts.rhs, bound, parts.post,
                          observer);
}

}  // namespace reofilm
