#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "reofilm/model_kernels.hpp"

namespace reofilm {

enum class BoundaryKind {
  Periodic,
  Outflow,  // zero gradient; one-sided second-order stencils at the ends
  Wall,     // reflective: velocity odd, thickness even about the end faces
};

std::string_view to_string(BoundaryKind bc);
BoundaryKind parse_boundary(std::string_view name);

enum class FluxScheme { Central, Upwind };

std::string_view to_string(FluxScheme scheme);
FluxScheme parse_flux_scheme(std::string_view name);

/// Symmetry of a field about a wall face: thickness is even, velocity and
/// flux are odd.
enum class Parity { Even, Odd };

/// Uniform cell-centred mesh on [0, length).
class Grid {
 public:
  static constexpr std::size_t kMinCells = 8;

  /// Throws DomainError for n < 8 or a non-positive length.
  Grid(std::size_t n, double length, BoundaryKind bc = BoundaryKind::Periodic);

  std::size_t n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  BoundaryKind bc() const noexcept { return bc_; }

  double x(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx(); }
  std::vector<double> cell_centers() const;

 private:
  std::size_t n_;
  double length_;
  BoundaryKind bc_;
};

struct FilmState {
  std::vector<double> eta;
  std::vector<double> vel;  // mean velocity, or E for the EtaE family
  double time = 0.0;
};

/// Second-order central differences; one-sided second order at outflow ends,
/// mirrored ghost cells of the given parity at walls.
std::vector<double> gradient(std::span<const double> field, const Grid& grid,
                             Parity parity = Parity::Even);

/// Central divergence (F[i+1] - F[i-1]) / (2 dx). Telescopes to zero on
/// periodic and wall grids, so the discrete mass is conserved.
std::vector<double> flux_divergence(std::span<const double> flux, const Grid& grid);

/// First-order upwind-biased divergence with local Lax-Friedrichs faces:
/// F = (F_l + F_r)/2 - a (eta_r - eta_l)/2, a the larger of the two cell
/// wave speeds. Conservative on periodic and wall grids.
std::vector<double> upwind_flux_divergence(std::span<const double> flux,
                                           std::span<const double> eta,
                                           std::span<const double> speed, const Grid& grid);

/// Largest wave speed of the quasilinear system at one cell: the spectral
/// radius of [[dF/deta, dF/dvel], [-dS/deta_x, -dS/dvel_x]] where F is the
/// thickness flux and S the momentum source.
double characteristic_speed(const FilmModel& model, double eta, double vel);

struct Tendency {
  std::vector<double> deta;
  std::vector<double> dvel;
};

enum class TermSelection {
  All,
  Inertia,  // everything except bed drag and gravity
};

/// Full spatial right-hand side of `model` on `grid`.
///
/// Gradients are computed once per field, the pointwise kernel is applied at
/// every cell, and d(eta)/dt = -divergence(flux). A kernel failure is
/// rethrown as ModelError naming the cell index and its state.
Tendency assemble_rhs(const FilmState& state, const Grid& grid, const FilmModel& model,
                      FluxScheme scheme = FluxScheme::Central,
                      TermSelection terms = TermSelection::All);

}  // namespace reofilm
