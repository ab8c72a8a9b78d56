#include "reofilm/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "reofilm/errors.hpp"

namespace reofilm {

std::string_view to_string(BoundaryKind bc) {
  switch (bc) {
    case BoundaryKind::Periodic:
      return "periodic";
    case BoundaryKind::Outflow:
      return "outflow";
    case BoundaryKind::Wall:
      return "wall";
  }
  return "unknown";
}

BoundaryKind parse_boundary(std::string_view name) {
  if (name == "periodic") return BoundaryKind::Periodic;
  if (name == "outflow") return BoundaryKind::Outflow;
  if (name == "wall") return BoundaryKind::Wall;
  throw DomainError(
      fmt::format("unknown boundary condition '{}' (expected periodic, outflow or wall)", name));
}

std::string_view to_string(FluxScheme scheme) {
  return scheme == FluxScheme::Central ? "central" : "upwind";
}

FluxScheme parse_flux_scheme(std::string_view name) {
  if (name == "central") return FluxScheme::Central;
  if (name == "upwind") return FluxScheme::Upwind;
  throw DomainError(fmt::format("unknown flux scheme '{}' (expected central or upwind)", name));
}

Grid::Grid(std::size_t n, double length, BoundaryKind bc) : n_(n), length_(length), bc_(bc) {
  if (n_ < kMinCells) {
    throw DomainError(fmt::format("grid needs at least {} cells, got {}", kMinCells, n_));
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw DomainError(fmt::format("grid length {} must be > 0", length_));
  }
}

std::vector<double> Grid::cell_centers() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

namespace {

void check_size(std::span<const double> field, const Grid& grid, std::string_view what) {
  if (field.size() != grid.n()) {
    throw DomainError(
        fmt::format("{} has {} entries but the grid has {} cells", what, field.size(), grid.n()));
  }
}

// Neighbour values of cell i, with ghost cells supplied by the boundary kind.
// Only valid for periodic and wall grids.
struct Neighbours {
  double left;
  double right;
};

Neighbours neighbours(std::span<const double> f, std::size_t i, const Grid& grid, Parity parity) {
  const std::size_t n = f.size();
  const double mirror = parity == Parity::Even ? 1.0 : -1.0;
  double left, right;
  if (i > 0) {
    left = f[i - 1];
  } else {
    left = grid.bc() == BoundaryKind::Periodic ? f[n - 1] : mirror * f[0];
  }
  if (i + 1 < n) {
    right = f[i + 1];
  } else {
    right = grid.bc() == BoundaryKind::Periodic ? f[0] : mirror * f[n - 1];
  }
  return {left, right};
}

std::vector<double> central_difference(std::span<const double> f, const Grid& grid,
                                       Parity parity) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (2.0 * grid.dx());
  std::vector<double> out(n);
  if (grid.bc() == BoundaryKind::Outflow) {
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv;
    // Mirror-image forms so that reversing the field negates the result exactly.
    out[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) * inv;
    out[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) * inv;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto [l, r] = neighbours(f, i, grid, parity);
    out[i] = (r - l) * inv;
  }
  return out;
}

}  // namespace

std::vector<double> gradient(std::span<const double> field, const Grid& grid, Parity parity) {
  check_size(field, grid, "field");
  return central_difference(field, grid, parity);
}

std::vector<double> flux_divergence(std::span<const double> flux, const Grid& grid) {
  check_size(flux, grid, "flux");
  return central_difference(flux, grid, Parity::Odd);
}

std::vector<double> upwind_flux_divergence(std::span<const double> flux,
                                           std::span<const double> eta,
                                           std::span<const double> speed, const Grid& grid) {
  check_size(flux, grid, "flux");
  check_size(eta, grid, "eta");
  check_size(speed, grid, "speed");
  const std::size_t n = grid.n();

  // Ghost values: periodic wraps, walls mirror (flux odd, thickness and
  // speed even), outflow copies the end cell.
  auto ghost = [&](std::span<const double> f, bool left_end, Parity parity) {
    const std::size_t end = left_end ? 0 : n - 1;
    switch (grid.bc()) {
      case BoundaryKind::Periodic:
        return left_end ? f[n - 1] : f[0];
      case BoundaryKind::Wall:
        return parity == Parity::Odd ? -f[end] : f[end];
      case BoundaryKind::Outflow:
        return f[end];
    }
    return f[end];
  };
  auto face_flux = [](double fl, double fr, double hl, double hr, double al, double ar) {
    const double a = std::max(std::abs(al), std::abs(ar));
    return 0.5 * (fl + fr) - 0.5 * a * (hr - hl);
  };

  // faces[j] sits between cell j-1 and cell j.
  std::vector<double> faces(n + 1);
  faces[0] = face_flux(ghost(flux, true, Parity::Odd), flux[0], ghost(eta, true, Parity::Even),
                       eta[0], ghost(speed, true, Parity::Even), speed[0]);
  for (std::size_t j = 1; j < n; ++j) {
    faces[j] = face_flux(flux[j - 1], flux[j], eta[j - 1], eta[j], speed[j - 1], speed[j]);
  }
  faces[n] = face_flux(flux[n - 1], ghost(flux, false, Parity::Odd), eta[n - 1],
                       ghost(eta, false, Parity::Even), speed[n - 1],
                       ghost(speed, false, Parity::Even));

  const double inv = 1.0 / grid.dx();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (faces[i + 1] - faces[i]) * inv;
  return out;
}

double characteristic_speed(const FilmModel& model, double eta, double vel) {
  const auto fj = model.flux_jacobian(eta, vel);
  // The momentum source is affine in both gradients.
  const double base = model.rhs({eta, vel, 0.0, 0.0}).momentum.total();
  const double s_eta_x = model.rhs({eta, vel, 1.0, 0.0}).momentum.total() - base;
  const double s_vel_x = model.rhs({eta, vel, 0.0, 1.0}).momentum.total() - base;

  const double a = fj.d_eta, b = fj.d_vel, c = -s_eta_x, d = -s_vel_x;
  const double half_trace = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = half_trace * half_trace - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::abs(half_trace + root), std::abs(half_trace - root));
  }
  return std::sqrt(det);  // complex pair, |lambda|^2 = det
}

Tendency assemble_rhs(const FilmState& state, const Grid& grid, const FilmModel& model,
                      FluxScheme scheme, TermSelection terms) {
  check_size(state.eta, grid, "eta");
  check_size(state.vel, grid, "vel");
  const std::size_t n = grid.n();
  const auto deta_dx = gradient(state.eta, grid, Parity::Even);
  const auto dvel_dx = gradient(state.vel, grid, Parity::Odd);

  std::vector<double> flux(n);
  Tendency out;
  out.dvel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PointState p{state.eta[i], state.vel[i], deta_dx[i], dvel_dx[i]};
    PointRhs r;
    try {
      r = model.rhs(p);
    } catch (const Error& e) {
      throw ModelError(fmt::format("cell {} (x = {}, eta = {}, vel = {}): {}", i, grid.x(i), p.eta,
                                   p.vel, e.what()));
    }
    flux[i] = r.flux;
    out.dvel[i] = terms == TermSelection::All ? r.momentum.total() : r.momentum.inertia();
  }

  if (scheme == FluxScheme::Upwind) {
    std::vector<double> speed(n);
    for (std::size_t i = 0; i < n; ++i) {
      speed[i] = characteristic_speed(model, state.eta[i], state.vel[i]);
    }
    out.deta = upwind_flux_divergence(flux, state.eta, speed, grid);
  } else {
    out.deta = flux_divergence(flux, grid);
  }
  for (double& v : out.deta) v = -v;
  return out;
}

}  // namespace reofilm
