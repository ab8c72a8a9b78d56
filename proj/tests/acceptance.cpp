// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reofilm/analysis.hpp"
#include "reofilm/model_kernels.hpp"
#include "reofilm/scenarios_io.hpp"
#include "reofilm/timestepping.hpp"

using namespace reofilm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > time_limit) {
    o.pass = false;
    o.detail += fmt::format("; over time limit {} s", time_limit);
  }
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

FilmState uniform_equilibrium_state(const FilmModel& model, const Grid& grid, double eta) {
  const double v = uniform_equilibrium(model, eta).ubar_eq;
  return {std::vector<double>(grid.n(), eta), std::vector<double>(grid.n(), v), 0.0};
}

Outcome reduction_identity() {
  double worst_lib = 0.0, worst_oracle = 0.0;
  std::size_t count = 0;
  const ReductionProbe probe;
  ModelParams mp;
  mp.re = probe.re;
  mp.gr = probe.gr;
  mp.g_hat1 = probe.g_hat1;
  mp.g_hat2 = probe.g_hat2;
  mp.gamma = 1.0;
  for (double eta : {0.5, 1.0, 2.0}) {
    for (double u : {0.1, 0.5, 1.0}) {
      for (double s : {0.5, 1.0 / 1.96, 1.0, 1.5, 2.0}) {
        for (double cs : {0.5, 1.0, 2.0}) {
          const PointState p{eta, u, probe.deta_dx, probe.du_dx};
          const auto gen = rhs_general(p, mp, PowerLaw{s, cs}).momentum;
          const auto pl = rhs_power_law(p, mp, s, cs).momentum;
          const auto o = oracle::power_law_terms(eta, u, p.deta_dx, p.dvel_dx, s, cs, mp.re,
                                                 mp.g1(), mp.g2());
          worst_lib = std::max({worst_lib, rel(gen.drag, pl.drag), rel(gen.advection, pl.advection),
                                rel(gen.thickness_gradient, pl.thickness_gradient),
                                rel(gen.gravity, pl.gravity)});
          worst_oracle = std::max({worst_oracle, rel(gen.drag, o.drag),
                                   rel(gen.advection, o.advection),
                                   rel(gen.thickness_gradient, o.gradient),
                                   rel(gen.gravity, o.gravity)});
          ++count;
        }
      }
    }
  }
  const double worst = std::max(worst_lib, worst_oracle);
  return {worst <= 1e-12,
          fmt::format("{} samples, general vs power-law {:.2e}, general vs reference {:.2e}", count,
                      worst_lib, worst_oracle)};
}

Outcome coefficient_spot_checks() {
  const auto c = power_law_coeffs(1.0);
  const bool exact = c.adv == 71.0 / 48.0 && c.grad_eta == 1.0 / 8.0 &&
                     c.drag == 2.5 / std::numbers::sqrt2 && c.grav == 5.0 / 6.0;
  const double hec = power_law_coeffs(1.0 / 1.96).grad_eta;
  const bool hec_ok = std::abs(hec + 0.005) <= 1e-15;
  return {exact && hec_ok,
          fmt::format("s=1 {} , s=1/1.96 grad_eta={:.17g}", exact ? "exact" : "MISMATCH", hec)};
}

Outcome newtonian_equilibrium() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> d(0.1, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double eta = d(rng), g1 = d(rng);
    const double u = equilibrium_velocity(eta, 1.0, 1.0, g1).ubar_eq;
    worst = std::max(worst, rel(u, g1 * eta * eta / 3.0));
  }
  return {worst <= 1e-12, fmt::format("worst relative error {:.2e} over 100 samples", worst)};
}

Outcome steadiness() {
  const Grid grid(128, 20.0, BoundaryKind::Periodic);
  double worst = 0.0;
  std::string per;
  for (double s : {1.0 / 1.96, 1.0, 2.0}) {
    const FilmModel model(ModelFamily::PowerLawUbar, PowerLaw{s, 1.0},
                          ModelParams::from_components(1.0, 1.0, 1.0));
    const auto s0 = uniform_equilibrium_state(model, grid, 1.0);
    StepControl control;
    control.t_end = 10.0;
    const auto s1 = integrate(s0, grid, model, control);
    const double drift = std::max(max_abs_diff(s1.eta, s0.eta), max_abs_diff(s1.vel, s0.vel));
    worst = std::max(worst, drift);
    per += fmt::format(" s={:.4g}:{:.1e}", s, drift);
  }
  return {worst <= 1e-8, fmt::format("max drift{}", per)};
}

Outcome mass_conservation() {
  const Grid grid(256, 20.0, BoundaryKind::Periodic);
  const FilmModel model(ModelFamily::PowerLawUbar, Newtonian{1.0},
                        ModelParams::from_components(1.0, 1.0, 1.0));
  FilmState s0{std::vector<double>(grid.n()), std::vector<double>(grid.n(), 0.0), 0.0};
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double x = grid.x(i) - 10.0;
    s0.eta[i] = 1.0 + 0.5 * std::exp(-x * x);
  }
  StepControl control;
  control.t_end = 5.0;
  const double m0 = compute_diagnostics(s0, grid, 0.0).mass;
  const auto s1 = integrate(s0, grid, model, control);
  const double drift = std::abs(compute_diagnostics(s1, grid, 0.0).mass - m0) / m0;
  return {drift <= 1e-10, fmt::format("relative mass drift {:.2e}", drift)};
}

Outcome series_round_trip() {
  std::string detail;
  bool ok = true;
  for (double s : {0.6, 1.0, 2.0}) {
    auto residual = [&](double gamma) {
      ModelParams mp;
      mp.gamma = gamma;
      const double eta = 1.3, e = 0.8;
      const double u = mean_velocity(eta, e, mp, s, 1.0);
      return std::abs(invert_mean_velocity(eta, u, mp, s, 1.0) - e);
    };
    const double ratio = residual(0.1) / residual(0.05);
    ok = ok && ratio >= 6.0 && ratio <= 10.0;
    detail += fmt::format(" s={}:{:.3f}", s, ratio);
  }
  return {ok, fmt::format("residual ratio{}", detail)};
}

Outcome spatial_convergence() {
  const double length = 10.0, s = 1.0 / 1.96, g1 = 1.0, g2 = 1.0, re = 1.0;
  const double k = 2.0 * std::numbers::pi / length;
  const FilmModel model(ModelFamily::PowerLawUbar, PowerLaw{s, 1.0},
                        ModelParams::from_components(re, g1, g2));
  auto error = [&](std::size_t n) {
    const Grid grid(n, length, BoundaryKind::Periodic);
    FilmState st{std::vector<double>(n), std::vector<double>(n), 0.0};
    std::vector<double> exact_eta(n), exact_vel(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      const double h = 1.0 + 0.2 * std::sin(k * x), hx = 0.2 * k * std::cos(k * x);
      const double u = 0.5 + 0.3 * std::cos(k * x), ux = -0.3 * k * std::sin(k * x);
      st.eta[i] = h;
      st.vel[i] = u;
      exact_eta[i] = -(hx * u + h * ux);
      exact_vel[i] = oracle::power_law_terms(h, u, hx, ux, s, 1.0, re, g1, g2).total();
    }
    const auto t = assemble_rhs(st, grid, model);
    return std::max(max_abs_diff(t.deta, exact_eta), max_abs_diff(t.dvel, exact_vel));
  };
  const double e128 = error(128), e256 = error(256);
  const double ratio = e128 / e256;
  return {ratio >= 3.5 && ratio <= 4.5,
          fmt::format("error n=128 {:.3e}, n=256 {:.3e}, ratio {:.3f}", e128, e256, ratio)};
}

Outcome lubrication_limit() {
  const double length = 20.0, g1 = 1.0, g2 = 1.0;
  const Grid grid(128, length, BoundaryKind::Periodic);
  std::string detail;
  bool ok = true;
  for (double s : {1.0, 1.0 / 1.96}) {
    const FilmModel model(ModelFamily::PowerLawUbar, PowerLaw{s, 1.0},
                          ModelParams::from_components(1e-3, g1, g2));
    FilmState s0{std::vector<double>(grid.n()), std::vector<double>(grid.n(), 0.0), 0.0};
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double x = (grid.x(i) - 0.5 * length) / 2.0;
      s0.eta[i] = 1.0 + 0.1 * std::exp(-x * x);
    }
    StepControl control;
    control.t_end = 1.0;
    control.implicit_drag = true;
    const auto s1 = integrate(s0, grid, model, control);
    const auto eta_x = gradient(s1.eta, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double ul = oracle::lubrication_velocity(s1.eta[i], eta_x[i], s, 1.0, g1, g2);
      worst = std::max(worst, std::abs(s1.vel[i] - ul) / std::abs(ul));
    }
    ok = ok && worst <= 0.01;
    detail += fmt::format(" s={:.4g}:{:.2e}", s, worst);
  }
  return {ok, fmt::format("max relative |u - u_lub|{}", detail)};
}

Outcome horizontal_spreading() {
  // Half domain: a wall at x = 0 mirrors a bump centred on it.
  const double length = 12.0, background = 0.01;
  const std::size_t n = 240;
  const Grid grid(n, length, BoundaryKind::Wall);
  FilmState s0{std::vector<double>(n), std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i) / 0.5;
    s0.eta[i] = background + std::exp(-x * x);
  }
  const std::vector<double> times{10, 15, 20, 30, 40, 50, 60, 70, 80, 90, 100};

  std::vector<double> model_t, model_w;
  const FilmModel model(ModelFamily::PowerLawUbar, Newtonian{1.0},
                        ModelParams::from_components(1e-2, 0.0, 1.0));
  StepControl control;
  control.implicit_drag = true;
  control.t_end = times.back();
  control.output_every = 5.0;
  integrate(s0, grid, model, control, [&](const SimRecord& r) {
    for (double t : times) {
      if (std::abs(r.time - t) < 1e-9) {
        model_t.push_back(r.time);
        model_w.push_back(std::sqrt(11.0 / 3.0) *
                          oracle::spread_width(r.eta, grid.dx(), background, 0.0));
      }
    }
  });

  std::vector<double> ref_t, ref_w;
  oracle::spread_lubrication(s0.eta, length, times, [&](double t, const std::vector<double>& h) {
    ref_t.push_back(t);
    ref_w.push_back(std::sqrt(11.0 / 3.0) * oracle::spread_width(h, grid.dx(), background, 0.0));
  });

  if (model_t.size() != times.size()) return {false, "missing output times"};
  const double p_model = oracle::loglog_slope(model_t, model_w);
  const double p_ref = oracle::loglog_slope(ref_t, ref_w);
  double front_gap = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    front_gap = std::max(front_gap, std::abs(model_w[i] - ref_w[i]) / ref_w[i]);
  }
  const bool ok =
      std::abs(p_model - 0.2) <= 0.02 && std::abs(p_ref - 0.2) <= 0.02 && front_gap <= 0.02;
  return {ok, fmt::format("exponent model {:.4f}, reference {:.4f}; front {:.3f} -> {:.3f}, "
                          "max gap to reference {:.2e}",
                          p_model, p_ref, model_w.front(), model_w.back(), front_gap)};
}

FilmState reflect(const FilmState& s) {
  const std::size_t n = s.eta.size();
  FilmState r{std::vector<double>(n), std::vector<double>(n), s.time};
  for (std::size_t i = 0; i < n; ++i) {
    r.eta[i] = s.eta[n - 1 - i];
    r.vel[i] = -s.vel[n - 1 - i];
  }
  return r;
}

Outcome reflection_symmetry() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (auto family : {ModelFamily::PowerLawUbar, ModelFamily::EtaE, ModelFamily::General}) {
    for (auto bc : {BoundaryKind::Periodic, BoundaryKind::Outflow, BoundaryKind::Wall}) {
      for (auto scheme : {FluxScheme::Central, FluxScheme::Upwind}) {
        for (bool implicit : {false, true}) {
          const Grid grid(64, 8.0, bc);
          ModelParams mp;
          mp.re = 2.0;
          mp.gr = 1.0;
          mp.g_hat1 = 0.7;
          mp.g_hat2 = 0.9;
          mp.gamma = 0.8;
          ModelParams mirrored = mp;
          mirrored.g_hat1 = -mp.g_hat1;
          const Rheology r = PowerLaw{1.0 / 1.96, 1.3};
          const FilmModel model(family, r, mp), model_m(family, r, mirrored);
          FilmState s{std::vector<double>(grid.n()), std::vector<double>(grid.n()), 0.0};
          for (std::size_t i = 0; i < grid.n(); ++i) {
            const double x = grid.x(i);
            s.eta[i] = 1.0 + 0.3 * std::sin(0.9 * x) + 0.02 * noise(rng);
            s.vel[i] = 0.4 * std::cos(0.7 * x) + 0.1 + 0.02 * noise(rng);
          }
          StepControl control;
          control.implicit_drag = implicit;
          control.flux_scheme = scheme;
          const double dt = 0.5 * stable_dt(s, grid, model, control);
          const auto a = reflect(advance(s, dt, grid, model, control).state);
          const auto b = advance(reflect(s), dt, grid, model_m, control).state;
          worst = std::max({worst, max_abs_diff(a.eta, b.eta), max_abs_diff(a.vel, b.vel)});
          ++cases;
        }
      }
    }
  }
  return {worst <= 1e-13, fmt::format("{} scenarios, max mismatch {:.2e}", cases, worst)};
}

Outcome zero_wavenumber_spectrum() {
  double worst_zero = 0.0, worst_decay = 0.0;
  for (double s : {1.0 / 1.96, 1.0, 2.0}) {
    for (double g1 : {0.5, 1.0, 3.0}) {
      const double re = 0.7, eta = 1.2;
      const auto mp = ModelParams::from_components(re, g1, 1.0);
      const auto g = growth_rates(0.0, eta, s, 1.0, mp);
      // d(drag)/du = s drag/u and drag balances gravity at equilibrium.
      const double u = oracle::lubrication_velocity(eta, 0.0, s, 1.0, g1, 1.0);
      const double expected = -s * (19.0 + 1.0 / s) / 24.0 * g1 / (u * re);
      worst_zero = std::max(worst_zero, std::abs(g.sigma[0]));
      worst_decay = std::max(worst_decay, std::abs(g.sigma[1] - expected));
    }
  }
  // Rest state with linear drag: the decay rate is the drag coefficient.
  const auto rest = growth_rates(0.0, 1.0, 1.0, 1.0, ModelParams::from_components(1.0, 0.0, 1.0));
  worst_zero = std::max(worst_zero, std::abs(rest.sigma[0]));
  worst_decay = std::max(worst_decay, std::abs(rest.sigma[1] - (-2.5)));
  return {worst_zero <= 1e-13 && worst_decay <= 1e-10,
          fmt::format("max |sigma_mass| {:.2e}, max decay-rate error {:.2e}", worst_zero,
                      worst_decay)};
}

}  // namespace

int main() {
  run(1, "reduction identity", 1.0, reduction_identity);
  run(2, "coefficient spot checks", 1.0, coefficient_spot_checks);
  run(3, "newtonian equilibrium", 1.0, newtonian_equilibrium);
  run(4, "steadiness", 30.0, steadiness);
  run(5, "mass conservation", 30.0, mass_conservation);
  run(6, "series round trip", 1.0, series_round_trip);
  run(7, "spatial convergence", 5.0, spatial_convergence);
  run(8, "lubrication limit", 60.0, lubrication_limit);
  run(9, "horizontal spreading", 60.0, horizontal_spreading);
  run(10, "reflection symmetry", 1.0, reflection_symmetry);
  run(11, "zero wavenumber spectrum", 1.0, zero_wavenumber_spectrum);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
