#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace reofilm {

struct ViscosityDerivs {
  double nu = 0.0;
  double dnu = 0.0;   // d nu / d eps
  double d2nu = 0.0;  // d^2 nu / d eps^2
};

/// nu(eps) = cs * eps^(s-1)
struct PowerLaw {
  double s = 1.0;
  double cs = 1.0;
};

/// Constant viscosity. Kept apart from PowerLaw{1, nu} so no derivative
/// formula ever forms 0 * inf.
struct Newtonian {
  double nu = 1.0;
};

/// Viscosity sampled at strictly increasing shear rates and interpolated by a
/// natural cubic spline, so the second derivative exists everywhere in range.
class Tabulated {
 public:
  using Sample = std::pair<double, double>;  // (shear rate, viscosity)

  explicit Tabulated(std::vector<Sample> samples);

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  double min_rate() const noexcept { return samples_.front().first; }
  double max_rate() const noexcept { return samples_.back().first; }

  /// Spline value and derivatives; eps must lie within the table.
  ViscosityDerivs evaluate(double eps) const;

 private:
  struct Spline;
  std::vector<Sample> samples_;
  std::shared_ptr<const Spline> spline_;
};

using Rheology = std::variant<PowerLaw, Newtonian, Tabulated>;

/// Rheology evaluated at the mean shear rate of a film state.
struct RheoEval {
  double eps_bar = 0.0;  // sqrt(2)|u|/eta, floored
  double nu_bar = 0.0;
  double nu_p = 0.0;
  double nu_pp = 0.0;
  double r_nu = 0.0;  // 1 / (nu_bar + eps_bar * nu_p)
};

/// Throws DomainError if the parameters violate the variant's invariants.
void validate(const Rheology& r);

/// Viscosity and its first two shear-rate derivatives at `eps`.
///
/// Throws DomainError when eps is below kShearRateFloor, or outside the
/// table of a Tabulated law.
ViscosityDerivs viscosity(const Rheology& r, double eps);

/// Evaluates the rheology at eps_bar = max(sqrt(2)|ubar|/eta, kShearRateFloor).
///
/// Throws ModelError when nu + eps*nu' <= 0, i.e. when the shear stress
/// eps*nu(eps) is not increasing at this state and R_nu does not exist.
RheoEval evaluate_at_state(const Rheology& r, double eta, double ubar);

/// The three rheology contractions that appear in the general momentum
/// equation. For a power law they reduce to 1-1/s, 25(1-1/s) and 1-1/s.
struct BracketContractions {
  double drag = 0.0;       // eps nu R^2 (2 nu' + eps nu'')
  double advection = 0.0;  // eps R^2 (38 nu nu' + 12 eps nu'^2 + 13 eps nu nu'')
  double gradient = 0.0;   // eps^2 R^2 (2 nu'^2 - nu nu'')
};

BracketContractions bracket_contractions(const RheoEval& ev);

/// Named presets: "newtonian", "hec" (s = 1/1.96), "shear-thickening-2" (s = 2).
Rheology rheology_preset(std::string_view name);

/// Power-law view of a rheology: PowerLaw as is, Newtonian as {1, nu}.
/// Tabulated laws have no such view.
std::optional<PowerLaw> as_power_law(const Rheology& r);

std::string describe(const Rheology& r);

}  // namespace reofilm
