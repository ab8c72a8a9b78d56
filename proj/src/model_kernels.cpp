#include "reofilm/model_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "reofilm/constants.hpp"
#include "reofilm/errors.hpp"

namespace reofilm {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void check_point(const PointState& p, const ModelParams& mp) {
  if (!(p.eta >= kThicknessFloor)) {
    throw ModelError(
        fmt::format("thin film: thickness {} is below the floor {}", p.eta, kThicknessFloor));
  }
  if (!std::isfinite(p.vel) || !std::isfinite(p.deta_dx) || !std::isfinite(p.dvel_dx)) {
    throw ModelError("non-finite film state");
  }
  if (!(mp.re > 0.0)) {
    throw ModelError(
        "Reynolds number must be > 0 for the momentum equation; use lubrication_velocity for "
        "the Re -> 0 limit");
  }
}

void check_exponent(double s, double cs) {
  if (!(s > 0.0)) throw DomainError(fmt::format("power-law exponent s = {} must be > 0", s));
  if (!(cs > 0.0)) throw DomainError(fmt::format("power-law coefficient cs = {} must be > 0", cs));
}

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::PowerLawUbar:
      return "power_law_ubar";
    case ModelFamily::EtaE:
      return "eta_E";
    case ModelFamily::General:
      return "general";
  }
  return "unknown";
}

ModelFamily parse_family(std::string_view name) {
  if (name == "power_law_ubar") return ModelFamily::PowerLawUbar;
  if (name == "eta_E") return ModelFamily::EtaE;
  if (name == "general") return ModelFamily::General;
  throw DomainError(
      fmt::format("unknown model family '{}' (expected power_law_ubar, eta_E or general)", name));
}

ModelParams ModelParams::from_components(double re, double g1, double g2, double gamma) {
  ModelParams mp;
  mp.re = re;
  mp.gamma = gamma;
  if (g1 == 0.0 && g2 == 0.0) {
    mp.gr = 0.0;
    mp.g_hat1 = 0.0;
    mp.g_hat2 = 1.0;
  } else {
    mp.gr = 1.0;
    mp.g_hat1 = g1;
    mp.g_hat2 = g2;
  }
  return mp;
}

void ModelParams::validate() const {
  if (!(re >= 0.0) || !std::isfinite(re)) throw DomainError(fmt::format("re = {} must be >= 0", re));
  if (!(gr >= 0.0) || !std::isfinite(gr)) throw DomainError(fmt::format("gr = {} must be >= 0", gr));
  if (!std::isfinite(g_hat1) || !std::isfinite(g_hat2)) {
    throw DomainError("gravity direction must be finite");
  }
  if (gr > 0.0 && g_hat1 * g_hat1 + g_hat2 * g_hat2 == 0.0) {
    throw DomainError("gravity direction (g_hat1, g_hat2) must be nonzero when gr > 0");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw DomainError(fmt::format("gamma = {} must lie in [0, 1]", gamma));
  }
}

PowerLawCoeffs power_law_coeffs(double s) {
  if (!(s > 0.0)) throw DomainError(fmt::format("power-law exponent s = {} must be > 0", s));
  const double inv = 1.0 / s;
  return {
      (167.0 - 25.0 * inv) / 96.0,
      (25.0 - 13.0 * inv) / 96.0,
      5.0 * (25.0 - inv) / 48.0 / kSqrt2,
      (19.0 + inv) / 24.0,
  };
}

PointRhs rhs_power_law(const PointState& p, const ModelParams& mp, double s, double cs) {
  check_exponent(s, cs);
  check_point(p, mp);
  const auto c = power_law_coeffs(s);
  const double u = p.vel;
  const double shear = kSqrt2 * std::abs(u) / p.eta;

  PointRhs out;
  out.flux = p.eta * u;
  out.momentum.drag = -c.drag * cs * sign(u) * std::pow(shear, s) / p.eta / mp.re;
  out.momentum.advection = -c.adv * u * p.dvel_dx;
  out.momentum.thickness_gradient = -c.grad_eta * u * u * p.deta_dx / p.eta;
  out.momentum.gravity = c.grav * (mp.g1() - mp.g2() * p.deta_dx) / mp.re;
  return out;
}

PointRhs rhs_eta_E(const PointState& p, const ModelParams& mp, double s, double cs) {
  check_exponent(s, cs);
  check_point(p, mp);
  const double g = mp.gamma;
  const double e = p.vel;
  const double eta = p.eta;

  PointRhs out;
  out.flux = (1.0 + 5.0 * kSqrt2 / (48.0 * s) * g) * 0.5 * eta * eta * e;

  const double drag_bracket = 2.5 * (g + (1.0 - 1.0 / s) / 4.0 * g * g);
  out.momentum.drag = -drag_bracket * cs * sign(e) * std::pow(std::abs(e), s) / (eta * eta) / mp.re;
  out.momentum.advection = -kSqrt2 * (3.0 / 8.0 + (1.0 - 8.0 / s) / 96.0 * g) * eta * e * p.dvel_dx;
  out.momentum.thickness_gradient = kSqrt2 * g / (6.0 * s) * e * e * p.deta_dx;
  const double grav_bracket = 0.75 - (1.0 + 1.0 / s) / 16.0 * g;
  out.momentum.gravity =
      mp.gr * kSqrt2 * grav_bracket * (mp.g_hat1 - mp.g_hat2 * p.deta_dx) / eta / mp.re;
  return out;
}

GeneralBrackets general_brackets(const RheoEval& ev, double gamma) {
  const auto k = bracket_contractions(ev);
  const double g = gamma;
  return {
      2.5 * g + 5.0 * g * g / 48.0 * k.drag,
      7.0 / 4.0 - 13.0 * g / 48.0 + g / 96.0 * k.advection,
      1.0 / 8.0 - g / 16.0 + 13.0 * g / 192.0 * k.gradient,
      0.75 + g / 12.0 - g / 24.0 * k.drag,
  };
}

PointRhs rhs_general(const PointState& p, const ModelParams& mp, const Rheology& r) {
  check_point(p, mp);
  const RheoEval ev = evaluate_at_state(r, p.eta, p.vel);
  const auto b = general_brackets(ev, mp.gamma);
  const double u = p.vel;
  const double eta = p.eta;

  PointRhs out;
  out.flux = eta * u;
  out.momentum.drag = -b.drag * ev.nu_bar * u / (eta * eta) / mp.re;
  out.momentum.advection = -b.advection * u * p.dvel_dx;
  // sqrt2 * bracket * eps_bar * u with the signed eps_bar = sqrt2 u / eta.
  out.momentum.thickness_gradient = -2.0 * b.gradient * u * u * p.deta_dx / eta;
  out.momentum.gravity = b.gravity * mp.gr * (mp.g_hat1 - mp.g_hat2 * p.deta_dx) / mp.re;
  return out;
}

namespace {

struct SeriesCoeffs {
  double a1;
  double a2;
};

SeriesCoeffs velocity_series(double s) {
  return {5.0 / (24.0 * s), 5.0 * (4.0 - 1.0 / s) / (288.0 * s)};
}

// First-order gradient/gravity correction to the mean velocity at shear e.
double velocity_correction(double eta, double e, const ModelParams& mp, double s, double cs,
                           double de_dx, double deta_dx) {
  const double forcing =
      mp.re / 160.0 * e * de_dx + mp.gr / 48.0 * (mp.g_hat1 - mp.g_hat2 * deta_dx);
  if (forcing == 0.0) return 0.0;
  const double mag = std::max(std::abs(e), kShearRateFloor);
  return eta * eta * std::pow(mag, 1.0 - s) / (s * cs) * forcing;
}

void check_series_args(double eta, double s, double cs) {
  check_exponent(s, cs);
  if (!(eta >= kThicknessFloor)) {
    throw ModelError(
        fmt::format("thin film: thickness {} is below the floor {}", eta, kThicknessFloor));
  }
}

}  // namespace

double mean_velocity(double eta, double e, const ModelParams& mp, double s, double cs,
                     double de_dx, double deta_dx) {
  check_series_args(eta, s, cs);
  const auto [a1, a2] = velocity_series(s);
  const double g = mp.gamma;
  const double leading = (1.0 + a1 * g + a2 * g * g) * eta * e / kSqrt2;
  return leading + velocity_correction(eta, e, mp, s, cs, de_dx, deta_dx);
}

double invert_mean_velocity(double eta, double ubar, const ModelParams& mp, double s, double cs,
                            double de_dx, double deta_dx) {
  check_series_args(eta, s, cs);
  const auto [a1, a2] = velocity_series(s);
  const double g = mp.gamma;
  // 1 / (1 + a1 g + a2 g^2) truncated after g^2.
  const double reverted = 1.0 - a1 * g + (a1 * a1 - a2) * g * g;
  const double e0 = kSqrt2 * ubar / eta * reverted;
  const double correction = velocity_correction(eta, e0, mp, s, cs, de_dx, deta_dx);
  return e0 - kSqrt2 / eta * reverted * correction;
}

namespace {

// Each power-law term with its coefficient parts and forcing added in magnitude.
std::array<double, 4> summand_magnitudes(const PointState& p, const ModelParams& mp, double s,
                                         double cs) {
  const double inv = 1.0 / s;
  const double shear = std::pow(kSqrt2 * std::abs(p.vel) / p.eta, s);
  return {
      5.0 * (25.0 + inv) / (48.0 * kSqrt2) * cs * shear / p.eta / mp.re,
      (167.0 + 25.0 * inv) / 96.0 * std::abs(p.vel * p.dvel_dx),
      (25.0 + 13.0 * inv) / 96.0 * p.vel * p.vel * std::abs(p.deta_dx) / p.eta,
      (19.0 + inv) / 24.0 * mp.gr * (std::abs(mp.g_hat1) + std::abs(mp.g_hat2 * p.deta_dx)) /
          mp.re,
  };
}

}  // namespace

ReductionReport reduction_residual(std::span<const ReductionSample> samples,
                                   const ReductionProbe& probe, double advection_perturbation,
                                   ResidualScale scale) {
  ModelParams mp;
  mp.re = probe.re;
  mp.gr = probe.gr;
  mp.g_hat1 = probe.g_hat1;
  mp.g_hat2 = probe.g_hat2;
  mp.gamma = 1.0;

  ReductionReport report;
  for (const auto& smp : samples) {
    const PointState p{smp.eta, smp.ubar, probe.deta_dx, probe.du_dx};
    auto closed = rhs_power_law(p, mp, smp.s, smp.cs).momentum;
    closed.advection *= 1.0 + advection_perturbation;
    const auto general = rhs_general(p, mp, PowerLaw{smp.s, smp.cs}).momentum;

    std::array<double, 4> diffs{
        relative_difference(closed.drag, general.drag),
        relative_difference(closed.advection, general.advection),
        relative_difference(closed.thickness_gradient, general.thickness_gradient),
        relative_difference(closed.gravity, general.gravity),
    };
    if (scale == ResidualScale::Summands) {
      const auto mags = summand_magnitudes(p, mp, smp.s, smp.cs);
      const std::array<std::pair<double, double>, 4> pairs{
          std::pair{closed.drag, general.drag},
          {closed.advection, general.advection},
          {closed.thickness_gradient, general.thickness_gradient},
          {closed.gravity, general.gravity}};
      for (std::size_t t = 0; t < diffs.size(); ++t) {
        const auto [a, b] = pairs[t];
        const double denom = std::max({std::abs(a), std::abs(b), mags[t]});
        diffs[t] = denom > 0.0 ? std::abs(a - b) / denom : 0.0;
      }
    }
    for (std::size_t t = 0; t < diffs.size(); ++t) {
      if (diffs[t] > report.worst_by_term[t] || report.samples == 0) {
        report.worst_by_term[t] = diffs[t];
        report.worst_sample[t] = smp;
      }
      report.max_residual = std::max(report.max_residual, diffs[t]);
    }
    ++report.samples;
  }
  return report;
}

std::vector<ReductionSample> default_reduction_grid() {
  std::vector<ReductionSample> grid;
  for (double eta : {0.5, 1.0, 2.0}) {
    for (double u : {0.1, 0.5, 1.0}) {
      for (double s : {0.5, 1.0 / 1.96, 1.0, 1.5, 2.0}) {
        for (double cs : {0.5, 1.0, 2.0}) {
          grid.push_back({eta, u, s, cs});
        }
      }
    }
  }
  return grid;
}

FilmModel::FilmModel(ModelFamily family, Rheology rheology, ModelParams params)
    : family_(family),
      rheology_(std::move(rheology)),
      params_(params),
      power_law_(as_power_law(rheology_)) {
  validate(rheology_);
  params_.validate();
  if (family_ != ModelFamily::General && !power_law_) {
    throw DomainError(fmt::format("model family {} requires a power-law or Newtonian rheology",
                                  to_string(family_)));
  }
}

PointRhs FilmModel::rhs(const PointState& p) const {
  switch (family_) {
    case ModelFamily::PowerLawUbar:
      return rhs_power_law(p, params_, power_law_->s, power_law_->cs);
    case ModelFamily::EtaE:
      return rhs_eta_E(p, params_, power_law_->s, power_law_->cs);
    case ModelFamily::General:
      return rhs_general(p, params_, rheology_);
  }
  return {};
}

double FilmModel::drag_rate(double eta, double vel) const {
  return rhs({eta, vel, 0.0, 0.0}).momentum.drag;
}

FluxJacobian FilmModel::flux_jacobian(double eta, double vel) const {
  if (family_ == ModelFamily::EtaE) {
    const double k = 1.0 + 5.0 * kSqrt2 / (48.0 * power_law_->s) * params_.gamma;
    return {k * eta * vel, 0.5 * k * eta * eta};
  }
  return {vel, eta};
}

FilmModel FilmModel::with_params(const ModelParams& params) const {
  return FilmModel(family_, rheology_, params);
}

}  // namespace reofilm
