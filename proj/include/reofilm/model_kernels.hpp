#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "reofilm/rheology.hpp"

namespace reofilm {

/// Which depth-averaged model is integrated.
///
///  - PowerLawUbar: thickness and mean velocity, power-law coefficients in closed form.
///  - EtaE: thickness and shear parameter E, with the artificial parameter gamma.
///  - General: thickness and mean velocity for any invertible rheology.
enum class ModelFamily { PowerLawUbar, EtaE, General };

std::string_view to_string(ModelFamily family);
/// Accepts "power_law_ubar", "eta_E" and "general".
ModelFamily parse_family(std::string_view name);

/// Nondimensional parameters shared by all families. Gravity is stored as a
/// magnitude `gr` and direction (g_hat1, g_hat2); g1() and g2() are the
/// components along and normal to the bed.
struct ModelParams {
  double re = 1.0;
  double gr = 0.0;
  double g_hat1 = 0.0;
  double g_hat2 = 1.0;
  double gamma = 1.0;

  double g1() const noexcept { return gr * g_hat1; }
  double g2() const noexcept { return gr * g_hat2; }

  /// gr = 1 and (g_hat1, g_hat2) = (g1, g2), or gr = 0 when both vanish, so
  /// that g1() and g2() reproduce the inputs exactly.
  static ModelParams from_components(double re, double g1, double g2, double gamma = 1.0);

  /// Throws DomainError naming the offending field.
  void validate() const;
};

/// Local film state. `vel` is the mean velocity for the ubar families and
/// the shear parameter E for the EtaE family.
struct PointState {
  double eta = 1.0;
  double vel = 0.0;
  double deta_dx = 0.0;
  double dvel_dx = 0.0;
};

/// Additive contributions to d(vel)/dt.
struct MomentumTerms {
  double drag = 0.0;
  double advection = 0.0;           // proportional to vel * d(vel)/dx
  double thickness_gradient = 0.0;  // proportional to vel^2 * d(eta)/dx
  double gravity = 0.0;

  double total() const noexcept { return drag + advection + thickness_gradient + gravity; }
  /// Terms carrying 1/Re: bed drag and gravity.
  double relaxation() const noexcept { return drag + gravity; }
  double inertia() const noexcept { return advection + thickness_gradient; }
};

/// Pointwise right-hand side. The thickness equation is kept in flux form,
/// d(eta)/dt = -d(flux)/dx, and assembled by the discretization.
struct PointRhs {
  double flux = 0.0;
  MomentumTerms momentum;
};

/// The four s-dependent coefficients of the power-law mean-velocity model.
struct PowerLawCoeffs {
  double adv = 0.0;       // (167 - 25/s) / 96
  double grad_eta = 0.0;  // (25 - 13/s) / 96
  double drag = 0.0;      // 5 (25 - 1/s) / (48 sqrt 2)
  double grav = 0.0;      // (19 + 1/s) / 24
};

PowerLawCoeffs power_law_coeffs(double s);

/// Power-law (eta, ubar) model:
///
///   Re [u_t + adv u u_x + grad_eta u^2 eta_x / eta]
///       = -drag cs sign(u) (sqrt2 |u| / eta)^s / eta + grav (g1 - g2 eta_x),
///   flux = eta u.
///
/// Throws ModelError for eta below kThicknessFloor or re == 0; the
/// inertia-free limit is lubrication_velocity.
PointRhs rhs_power_law(const PointState& p, const ModelParams& mp, double s, double cs);

/// Shear-parameter (eta, E) model with artificial parameter gamma. Here
/// p.vel is E and p.dvel_dx is dE/dx; flux = (1 + 5 sqrt2 gamma / (48 s)) eta^2 E / 2.
PointRhs rhs_eta_E(const PointState& p, const ModelParams& mp, double s, double cs);

/// The four gamma-dependent brackets of the general-rheology momentum model.
struct GeneralBrackets {
  double drag = 0.0;
  double advection = 0.0;
  double gradient = 0.0;
  double gravity = 0.0;
};

GeneralBrackets general_brackets(const RheoEval& ev, double gamma);

/// General-rheology (eta, ubar) model; flux = eta u. Rheology brackets are
/// evaluated at |eps_bar|, and the thickness-gradient term uses
/// eps_bar * u = sqrt2 u^2 / eta so the model is reflection symmetric.
PointRhs rhs_general(const PointState& p, const ModelParams& mp, const Rheology& r);

/// Mean lateral velocity as a truncated series in gamma, with first-order
/// gradient and gravity corrections.
double mean_velocity(double eta, double e, const ModelParams& mp, double s, double cs,
                     double de_dx = 0.0, double deta_dx = 0.0);

/// Series reversion of mean_velocity: exact to O(gamma^3) and to first order
/// in the gradient and gravity corrections.
double invert_mean_velocity(double eta, double ubar, const ModelParams& mp, double s, double cs,
                            double de_dx = 0.0, double deta_dx = 0.0);

struct ReductionSample {
  double eta = 1.0;
  double ubar = 1.0;
  double s = 1.0;
  double cs = 1.0;
};

/// Worst term-by-term relative difference between rhs_general with a power-law
/// rheology and rhs_power_law, at gamma = 1.
struct ReductionReport {
  static constexpr std::array<std::string_view, 4> kTermNames{"drag", "advection",
                                                             "thickness_gradient", "gravity"};
  std::array<double, 4> worst_by_term{};
  std::array<ReductionSample, 4> worst_sample{};
  double max_residual = 0.0;
  std::size_t samples = 0;
};

/// Gradient and gravity values used at every sample so all four terms are
/// exercised.
struct ReductionProbe {
  double deta_dx = 0.25;
  double du_dx = -0.4;
  double re = 1.3;
  double gr = 1.0;
  double g_hat1 = 0.8;
  double g_hat2 = 0.6;
};

/// Normalization of each term difference in reduction_residual.
///
///  - TermValue: |a - b| / max(|a|, |b|).
///  - Summands: also at least the term rebuilt from the magnitudes of its
///    coefficient parts, so a coefficient that nearly cancels (grad_eta near
///    s = 13/25) does not turn round-off into a large relative error.
enum class ResidualScale { TermValue, Summands };

/// `advection_perturbation` scales the power-law advection coefficient by
/// (1 + value); it exists so callers can check that a wrong coefficient is
/// detected.
ReductionReport reduction_residual(std::span<const ReductionSample> samples,
                                   const ReductionProbe& probe = {},
                                   double advection_perturbation = 0.0,
                                   ResidualScale scale = ResidualScale::TermValue);

/// eta in {0.5,1,2}, ubar in {0.1,0.5,1}, s in {0.5, 1/1.96, 1, 1.5, 2},
/// cs in {0.5, 1, 2}.
std::vector<ReductionSample> default_reduction_grid();

struct FluxJacobian {
  double d_eta = 0.0;
  double d_vel = 0.0;
};

/// A model family bound to its rheology and parameters; the single entry
/// point the discretization and analysis code evaluate.
class FilmModel {
 public:
  /// Throws DomainError if the family needs a power law and the rheology is
  /// tabulated, or if the parameters are invalid.
  FilmModel(ModelFamily family, Rheology rheology, ModelParams params);

  ModelFamily family() const noexcept { return family_; }
  const Rheology& rheology() const noexcept { return rheology_; }
  const ModelParams& params() const noexcept { return params_; }
  /// Present for PowerLaw and Newtonian rheologies.
  const std::optional<PowerLaw>& power_law() const noexcept { return power_law_; }

  PointRhs rhs(const PointState& p) const;

  /// Bed-drag contribution to d(vel)/dt with no gradients.
  double drag_rate(double eta, double vel) const;

  /// Derivatives of the thickness flux with respect to eta and vel.
  FluxJacobian flux_jacobian(double eta, double vel) const;

  FilmModel with_params(const ModelParams& params) const;

 private:
  ModelFamily family_;
  Rheology rheology_;
  ModelParams params_;
  std::optional<PowerLaw> power_law_;
};

}  // namespace reofilm
