#pragma once

namespace reofilm {

/// Smallest shear rate at which viscosity laws are evaluated. Power laws
/// with s < 1 (and their second derivative for s < 2) are singular at zero.
inline constexpr double kShearRateFloor = 1e-8;

/// Smallest admissible film thickness.
inline constexpr double kThicknessFloor = 1e-6;

}  // namespace reofilm
