#include "reofilm/analysis.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <variant>

#include "reofilm/constants.hpp"
#include "reofilm/errors.hpp"

namespace reofilm {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// u such that drag * cs * (sqrt2 |u| / eta)^s / eta = grav * |forcing|.
double power_law_balance(double eta, double s, double cs, double forcing) {
  if (forcing == 0.0) return 0.0;
  const auto c = power_law_coeffs(s);
  const double shear = std::pow(c.grav * std::abs(forcing) * eta / (c.drag * cs), 1.0 / s);
  return sign(forcing) * eta * shear / kSqrt2;
}

void check_power_law_args(double eta, double s, double cs) {
  if (!(eta > 0.0)) throw DomainError(fmt::format("thickness {} must be > 0", eta));
  if (!(s > 0.0)) throw DomainError(fmt::format("power-law exponent s = {} must be > 0", s));
  if (!(cs > 0.0)) throw DomainError(fmt::format("power-law coefficient cs = {} must be > 0", cs));
}

}  // namespace

EquilibriumResult equilibrium_velocity(double eta, double s, double cs, double g1) {
  check_power_law_args(eta, s, cs);
  EquilibriumResult res;
  res.ubar_eq = power_law_balance(eta, s, cs, g1);
  const auto mp = ModelParams::from_components(1.0, g1, 0.0, 1.0);
  res.residual = rhs_power_law({eta, res.ubar_eq, 0.0, 0.0}, mp, s, cs).momentum.total();
  return res;
}

EquilibriumResult equilibrium_velocity_general(double eta, const Rheology& r,
                                               const ModelParams& mp) {
  mp.validate();
  if (!(eta >= kThicknessFloor)) throw DomainError(fmt::format("thickness {} too small", eta));
  const double forcing = mp.g1();
  EquilibriumResult res;
  if (forcing == 0.0) return res;

  const double dir = sign(forcing);
  ModelParams unit_re = mp;
  unit_re.re = 1.0;
  auto balance = [&](double mag) {
    return dir * rhs_general({eta, dir * mag, 0.0, 0.0}, unit_re, r).momentum.total();
  };

  double lo = 0.0;
  if (const auto* t = std::get_if<Tabulated>(&r)) lo = eta * t->min_rate() / kSqrt2;
  if (!(balance(lo) > 0.0)) {
    throw ModelError("no equilibrium in range: drag already exceeds gravity at the lower bracket");
  }
  double hi = std::max(2.0 * lo, 1.0);
  std::size_t grow = 0;
  for (;; ++grow) {
    if (grow > 200 || !std::isfinite(hi)) {
      throw ModelError("no equilibrium in range: no sign change while growing the bracket");
    }
    if (const auto* t = std::get_if<Tabulated>(&r)) {
      hi = std::min(hi, eta * t->max_rate() / kSqrt2);
    }
    if (balance(hi) <= 0.0) break;
    if (const auto* t = std::get_if<Tabulated>(&r); t && hi >= eta * t->max_rate() / kSqrt2) {
      throw ModelError("no equilibrium in range: table ends before drag balances gravity");
    }
    lo = hi;
    hi *= 2.0;
  }

  std::uintmax_t iters = 400;
  // Terminates when the bracket is within ~5e-14 relative.
  const auto [a, b] =
      boost::math::tools::bisect(balance, lo, hi, boost::math::tools::eps_tolerance<double>(45),
                                 iters);
  res.ubar_eq = dir * 0.5 * (a + b);
  res.residual = rhs_general({eta, res.ubar_eq, 0.0, 0.0}, unit_re, r).momentum.total();
  res.iterations = static_cast<std::size_t>(iters) + grow;
  return res;
}

EquilibriumResult equilibrium_shear_eta_E(double eta, double s, double cs, const ModelParams& mp) {
  check_power_law_args(eta, s, cs);
  mp.validate();
  const double g = mp.gamma;
  const double drag = 2.5 * (g + (1.0 - 1.0 / s) / 4.0 * g * g) * cs / (eta * eta);
  const double grav = mp.gr * kSqrt2 * (0.75 - (1.0 + 1.0 / s) / 16.0 * g) * mp.g_hat1 / eta;
  EquilibriumResult res;
  if (grav == 0.0) return res;
  if (!(drag > 0.0)) {
    throw ModelError(fmt::format(
        "no equilibrium in range: drag coefficient {} is not positive at gamma = {}", drag, g));
  }
  res.ubar_eq = sign(grav) * std::pow(std::abs(grav) / drag, 1.0 / s);
  ModelParams unit_re = mp;
  unit_re.re = 1.0;
  res.residual = rhs_eta_E({eta, res.ubar_eq, 0.0, 0.0}, unit_re, s, cs).momentum.total();
  return res;
}

EquilibriumResult uniform_equilibrium(const FilmModel& model, double eta) {
  const auto& mp = model.params();
  switch (model.family()) {
    case ModelFamily::PowerLawUbar:
      return equilibrium_velocity(eta, model.power_law()->s, model.power_law()->cs, mp.g1());
    case ModelFamily::EtaE:
      return equilibrium_shear_eta_E(eta, model.power_law()->s, model.power_law()->cs, mp);
    case ModelFamily::General:
      return equilibrium_velocity_general(eta, model.rheology(), mp);
  }
  return {};
}

double lubrication_velocity(double eta, double deta_dx, double s, double cs, double g1,
                            double g2) {
  check_power_law_args(eta, s, cs);
  return power_law_balance(eta, s, cs, g1 - g2 * deta_dx);
}

EigenPairs2 eigen2(const std::array<std::array<std::complex<double>, 2>, 2>& m) {
  using C = std::complex<double>;
  const C a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
  const C half_trace = 0.5 * (a + d);
  const C det = a * d - b * c;
  const C root = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
  // Add the root with the sign that avoids cancellation; recover the other
  // eigenvalue from the determinant.
  const C big = std::abs(half_trace + root) >= std::abs(half_trace - root) ? half_trace + root
                                                                           : half_trace - root;
  const C small = big == C(0.0) ? C(0.0) : det / big;

  EigenPairs2 out;
  out.values = {big, small};
  if (small.real() > big.real()) std::swap(out.values[0], out.values[1]);

  for (std::size_t j = 0; j < 2; ++j) {
    const C lambda = out.values[j];
    const std::array<C, 2> v1{b, lambda - a};
    const std::array<C, 2> v2{lambda - d, c};
    const double n1 = std::hypot(std::abs(v1[0]), std::abs(v1[1]));
    const double n2 = std::hypot(std::abs(v2[0]), std::abs(v2[1]));
    std::array<C, 2> v;
    double norm;
    if (n1 >= n2) {
      v = v1;
      norm = n1;
    } else {
      v = v2;
      norm = n2;
    }
    if (norm == 0.0) {
      // Scalar multiple of the identity: every vector is an eigenvector.
      v = j == 0 ? std::array<C, 2>{1.0, 0.0} : std::array<C, 2>{0.0, 1.0};
      norm = 1.0;
    }
    out.vectors[j] = {v[0] / norm, v[1] / norm};
  }
  return out;
}

GrowthRates growth_rates(double k, double eta0, double s, double cs, const ModelParams& mp) {
  check_power_law_args(eta0, s, cs);
  const double ubar = equilibrium_velocity(eta0, s, cs, mp.g1()).ubar_eq;
  if (ubar == 0.0 && s < 1.0) {
    throw ModelError("drag linearization is singular at zero velocity for s < 1");
  }
  const FilmModel model(ModelFamily::PowerLawUbar, PowerLaw{s, cs}, mp);
  auto source = [&](double eta, double u, double eta_x, double u_x) {
    return model.rhs({eta, u, eta_x, u_x}).momentum.total();
  };
  // Fourth-order central differences.
  auto derivative = [](auto&& f, double x, double h) {
    return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
  };
  const double h_eta = 1e-3 * eta0;
  const double h_u = ubar != 0.0 ? 1e-3 * std::abs(ubar) : 1e-3;
  const double s_eta = derivative([&](double e) { return source(e, ubar, 0.0, 0.0); }, eta0, h_eta);
  const double s_u = derivative([&](double u) { return source(eta0, u, 0.0, 0.0); }, ubar, h_u);
  const double base = source(eta0, ubar, 0.0, 0.0);
  const double s_eta_x = source(eta0, ubar, 1.0, 0.0) - base;
  const double s_u_x = source(eta0, ubar, 0.0, 1.0) - base;

  using C = std::complex<double>;
  const C ik(0.0, k);
  const auto fj = model.flux_jacobian(eta0, ubar);
  GrowthRates out;
  out.k = k;
  out.ubar_eq = ubar;
  out.matrix = {{{-ik * fj.d_eta, -ik * fj.d_vel}, {s_eta + ik * s_eta_x, s_u + ik * s_u_x}}};
  const auto eig = eigen2(out.matrix);
  out.sigma = eig.values;
  out.eigenvectors = eig.vectors;
  return out;
}

std::vector<double> lubrication_velocity_field(const FilmState& state, const Grid& grid,
                                               const LubricationModel& lm) {
  const auto deta_dx = gradient(state.eta, grid, Parity::Even);
  std::vector<double> u(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    u[i] = lubrication_velocity(state.eta[i], deta_dx[i], lm.s, lm.cs, lm.g1, lm.g2);
  }
  return u;
}

Tendency lubrication_rhs(const FilmState& state, const Grid& grid, const LubricationModel& lm) {
  for (std::size_t i = 0; i < state.eta.size(); ++i) {
    if (!(state.eta[i] >= kThicknessFloor)) {
      throw ModelError(fmt::format("cell {}: thin film, thickness {} below floor", i,
                                   state.eta[i]));
    }
  }
  const auto u = lubrication_velocity_field(state, grid, lm);
  std::vector<double> flux(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) flux[i] = state.eta[i] * u[i];
  Tendency out;
  out.deta = flux_divergence(flux, grid);
  for (double& v : out.deta) v = -v;
  return out;
}

double lubrication_stable_dt(const FilmState& state, const Grid& grid, const LubricationModel& lm,
                             const StepControl& control) {
  const auto deta_dx = gradient(state.eta, grid, Parity::Even);
  std::vector<double> forcing(grid.n());
  double max_forcing = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    forcing[i] = lm.g1 - lm.g2 * deta_dx[i];
    max_forcing = std::max(max_forcing, std::abs(forcing[i]));
  }
  // du/dF = u / (s F) is unbounded at F = 0 when s > 1.
  const double forcing_floor = std::max(1e-8, 1e-3 * max_forcing);
  const double dx = grid.dx();
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double f = std::max(std::abs(forcing[i]), forcing_floor);
    const double u = std::abs(power_law_balance(state.eta[i], lm.s, lm.cs, f));
    const double diffusivity = state.eta[i] * std::abs(lm.g2) * u / (lm.s * f);
    if (diffusivity > 0.0) bound = std::min(bound, dx * dx / diffusivity);
    const double u_here = std::abs(power_law_balance(state.eta[i], lm.s, lm.cs, forcing[i]));
    const double speed = (2.0 + 1.0 / lm.s) * u_here;
    if (speed > 0.0) bound = std::min(bound, dx / speed);
  }
  if (!std::isfinite(bound)) return control.dt_max;
  const double dt = control.cfl * bound;
  if (dt < control.dt_min) {
    throw StiffnessError(
        fmt::format("lubrication step {} is below dt_min {}", dt, control.dt_min));
  }
  return std::min(dt, control.dt_max);
}

FilmState integrate_lubrication(FilmState state0, const Grid& grid, const LubricationModel& lm,
                                const StepControl& control, const Observer& observer) {
  check_power_law_args(1.0, lm.s, lm.cs);
  if (state0.eta.size() != grid.n()) throw DomainError("initial state does not match the grid");
  state0.vel.clear();
  auto rhs = [&](const FilmState& s) { return lubrication_rhs(s, grid, lm); };
  auto bound = [&](const FilmState& s) { return lubrication_stable_dt(s, grid, lm, control); };
  Observer with_velocity;
  if (observer) {
    with_velocity = [&](const SimRecord& rec) {
      FilmState s{rec.eta, {}, rec.time};
      s.vel = lubrication_velocity_field(s, grid, lm);
      observer(make_record(s, grid, rec.diagnostics.dt_last));
    };
  }
  auto final_state = integrate_system(std::move(state0), grid, control, rhs, bound, {},
                                      with_velocity);
  final_state.vel = lubrication_velocity_field(final_state, grid, lm);
  return final_state;
}

}  // namespace reofilm
