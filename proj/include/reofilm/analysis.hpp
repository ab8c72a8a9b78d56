#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include "reofilm/model_kernels.hpp"
#include "reofilm/timestepping.hpp"

namespace reofilm {

struct EquilibriumResult {
  double ubar_eq = 0.0;
  double residual = 0.0;  // Re * d(ubar)/dt at the root, no gradients
  std::size_t iterations = 0;
};

/// Uniform-film velocity of the power-law model: bed drag balances the
/// along-bed gravity g1. Closed form; the sign of g1 sets the direction.
EquilibriumResult equilibrium_velocity(double eta, double s, double cs, double g1);

/// Uniform-film velocity of the general model at gamma = 1, by bisection on
/// the drag/gravity balance. The bracket [0, u_max] grows geometrically.
///
/// Throws ModelError ("no equilibrium in range") if no sign change is found.
EquilibriumResult equilibrium_velocity_general(double eta, const Rheology& r,
                                               const ModelParams& mp);

/// Uniform-film shear parameter of the (eta, E) model. Throws ModelError when
/// gamma = 0 and there is along-bed gravity (no drag to balance it).
EquilibriumResult equilibrium_shear_eta_E(double eta, double s, double cs, const ModelParams& mp);

/// Uniform equilibrium of the prognostic variable for any model family.
EquilibriumResult uniform_equilibrium(const FilmModel& model, double eta);

/// Inertia-free mean velocity: the power-law momentum balance with Re -> 0,
/// driven by F = g1 - g2 d(eta)/dx.
double lubrication_velocity(double eta, double deta_dx, double s, double cs, double g1, double g2);

/// Linear growth rates of Fourier modes exp(ikx + sigma t) about a uniform
/// power-law equilibrium.
struct GrowthRates {
  double k = 0.0;
  double ubar_eq = 0.0;
  std::array<std::array<std::complex<double>, 2>, 2> matrix{};
  std::array<std::complex<double>, 2> sigma{};
  std::array<std::array<std::complex<double>, 2>, 2> eigenvectors{};  // eigenvectors[j] for sigma[j]
};

/// Assembles the 2x2 matrix from finite-difference derivatives of the
/// pointwise kernel and returns both eigenvalues. The eigenvalue nearest the
/// mass mode comes first.
///
/// Throws ModelError when the equilibrium velocity is zero and s < 1, where
/// the drag linearization is singular.
GrowthRates growth_rates(double k, double eta0, double s, double cs, const ModelParams& mp);

/// Eigenpairs of a complex 2x2 matrix.
struct EigenPairs2 {
  std::array<std::complex<double>, 2> values{};
  std::array<std::array<std::complex<double>, 2>, 2> vectors{};
};

EigenPairs2 eigen2(const std::array<std::array<std::complex<double>, 2>, 2>& m);

/// Single-equation thickness dynamics d(eta)/dt = -d(eta * u_lub)/dx.
struct LubricationModel {
  double s = 1.0;
  double cs = 1.0;
  double g1 = 0.0;
  double g2 = 1.0;
};

/// Tendency of the lubrication model; the returned dvel is empty.
Tendency lubrication_rhs(const FilmState& state, const Grid& grid, const LubricationModel& lm);

/// cfl * min dx^2 / D, with D = eta * g2 * d(u_lub)/dF the local diffusivity
/// (F floored to keep D finite for s > 1).
double lubrication_stable_dt(const FilmState& state, const Grid& grid, const LubricationModel& lm,
                             const StepControl& control);

/// Integrates the lubrication model. `vel` of the records holds u_lub.
FilmState integrate_lubrication(FilmState state0, const Grid& grid, const LubricationModel& lm,
                                const StepControl& control, const Observer& observer = {});

/// u_lub at every cell of `state`.
std::vector<double> lubrication_velocity_field(const FilmState& state, const Grid& grid,
                                               const LubricationModel& lm);

}  // namespace reofilm
