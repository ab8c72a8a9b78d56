#include "reofilm/rheology.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <cmath>
#include <fmt/format.h>
#include <mutex>

#include "reofilm/constants.hpp"
#include "reofilm/errors.hpp"

namespace reofilm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void disable_gsl_abort() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

}  // namespace

struct Tabulated::Spline {
  struct Deleter {
    void operator()(gsl_spline* s) const { gsl_spline_free(s); }
  };
  std::unique_ptr<gsl_spline, Deleter> handle;
};

Tabulated::Tabulated(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 4) {
    throw DomainError(fmt::format("tabulated rheology needs at least 4 samples, got {}",
                                  samples_.size()));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto [eps, nu] = samples_[i];
    if (!std::isfinite(eps) || !std::isfinite(nu)) {
      throw DomainError(fmt::format("tabulated rheology sample {} is not finite", i));
    }
    if (nu <= 0.0) {
      throw DomainError(fmt::format("tabulated rheology sample {} has viscosity {} <= 0", i, nu));
    }
    if (i > 0 && eps <= samples_[i - 1].first) {
      throw DomainError(
          fmt::format("tabulated rheology shear rates must be strictly increasing (sample {})", i));
    }
  }

  disable_gsl_abort();
  std::vector<double> xs, ys;
  xs.reserve(samples_.size());
  ys.reserve(samples_.size());
  for (const auto& [eps, nu] : samples_) {
    xs.push_back(eps);
    ys.push_back(nu);
  }
  auto spline = std::make_shared<Spline>();
  spline->handle.reset(gsl_spline_alloc(gsl_interp_cspline, samples_.size()));
  if (!spline->handle || gsl_spline_init(spline->handle.get(), xs.data(), ys.data(), xs.size()) !=
                             GSL_SUCCESS) {
    throw DomainError("failed to build cubic spline for tabulated rheology");
  }
  spline_ = std::move(spline);
}

ViscosityDerivs Tabulated::evaluate(double eps) const {
  if (eps < min_rate() || eps > max_rate()) {
    throw DomainError(fmt::format(
        "shear rate {} outside tabulated range [{}, {}]; extrapolation is not supported", eps,
        min_rate(), max_rate()));
  }
  // A null accelerator keeps evaluation free of shared mutable state.
  const gsl_spline* s = spline_->handle.get();
  return {gsl_spline_eval(s, eps, nullptr), gsl_spline_eval_deriv(s, eps, nullptr),
          gsl_spline_eval_deriv2(s, eps, nullptr)};
}

void validate(const Rheology& r) {
  std::visit(Overloaded{
                 [](const PowerLaw& p) {
                   if (!(p.s > 0.0) || !std::isfinite(p.s)) {
                     throw DomainError(fmt::format("power-law exponent s = {} must be > 0", p.s));
                   }
                   if (!(p.cs > 0.0) || !std::isfinite(p.cs)) {
                     throw DomainError(
                         fmt::format("power-law coefficient cs = {} must be > 0", p.cs));
                   }
                 },
                 [](const Newtonian& n) {
                   if (!(n.nu > 0.0) || !std::isfinite(n.nu)) {
                     throw DomainError(fmt::format("viscosity nu = {} must be > 0", n.nu));
                   }
                 },
                 [](const Tabulated&) {},  // checked on construction
             },
             r);
}

ViscosityDerivs viscosity(const Rheology& r, double eps) {
  if (!(eps >= kShearRateFloor)) {
    throw DomainError(fmt::format("shear rate {} is below the floor {}", eps, kShearRateFloor));
  }
  validate(r);
  return std::visit(Overloaded{
                        [eps](const PowerLaw& p) {
                          const double nu = p.cs * std::pow(eps, p.s - 1.0);
                          const double dnu = (p.s - 1.0) * nu / eps;
                          const double d2nu = (p.s - 2.0) * dnu / eps;
                          return ViscosityDerivs{nu, dnu, d2nu};
                        },
                        [](const Newtonian& n) { return ViscosityDerivs{n.nu, 0.0, 0.0}; },
                        [eps](const Tabulated& t) { return t.evaluate(eps); },
                    },
                    r);
}

RheoEval evaluate_at_state(const Rheology& r, double eta, double ubar) {
  if (!(eta >= kThicknessFloor)) {
    throw ModelError(fmt::format("film thickness {} is below the floor {}", eta, kThicknessFloor));
  }
  if (!std::isfinite(ubar)) {
    throw ModelError("mean velocity is not finite");
  }
  RheoEval ev;
  ev.eps_bar = std::max(std::sqrt(2.0) * std::abs(ubar) / eta, kShearRateFloor);
  const auto d = viscosity(r, ev.eps_bar);
  ev.nu_bar = d.nu;
  ev.nu_p = d.dnu;
  ev.nu_pp = d.d2nu;
  const double stress_slope = ev.nu_bar + ev.eps_bar * ev.nu_p;
  if (!(stress_slope > 0.0)) {
    throw ModelError(fmt::format(
        "non-invertible rheology: nu + eps*nu' = {} <= 0 at eps = {} (shear stress not increasing)",
        stress_slope, ev.eps_bar));
  }
  ev.r_nu = 1.0 / stress_slope;
  return ev;
}

BracketContractions bracket_contractions(const RheoEval& ev) {
  const double e = ev.eps_bar;
  const double nu = ev.nu_bar;
  const double p = ev.nu_p;
  const double pp = ev.nu_pp;
  const double r2 = ev.r_nu * ev.r_nu;
  return {
      e * nu * r2 * (2.0 * p + e * pp),
      e * r2 * (38.0 * nu * p + 12.0 * e * p * p + 13.0 * e * nu * pp),
      e * e * r2 * (2.0 * p * p - nu * pp),
  };
}

Rheology rheology_preset(std::string_view name) {
  if (name == "newtonian") return Newtonian{1.0};
  if (name == "hec") return PowerLaw{1.0 / 1.96, 1.0};
  if (name == "shear-thickening-2") return PowerLaw{2.0, 1.0};
  throw DomainError(fmt::format(
      "unknown rheology preset '{}' (expected newtonian, hec or shear-thickening-2)", name));
}

std::optional<PowerLaw> as_power_law(const Rheology& r) {
  if (const auto* p = std::get_if<PowerLaw>(&r)) return *p;
  if (const auto* n = std::get_if<Newtonian>(&r)) return PowerLaw{1.0, n->nu};
  return std::nullopt;
}

std::string describe(const Rheology& r) {
  return std::visit(
      Overloaded{
          [](const PowerLaw& p) { return fmt::format("power_law(s={}, cs={})", p.s, p.cs); },
          [](const Newtonian& n) { return fmt::format("newtonian(nu={})", n.nu); },
          [](const Tabulated& t) {
            return fmt::format("tabulated({} samples, eps in [{}, {}])", t.samples().size(),
                               t.min_rate(), t.max_rate());
          },
      },
      r);
}

}  // namespace reofilm
