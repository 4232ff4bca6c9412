#pragma once

namespace dsdr {

/// Quintic smoothing CDF: 0 below -1, 1 above 1, and
/// 1/2 + 15/16 (v - 2/3 v^3 + 1/5 v^5) in between. C^1 at +-1.
constexpr double smooth_h(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double v2 = v * v;
  return 0.5 + (15.0 / 16.0) * v * (1.0 - v2 * (2.0 / 3.0 - v2 / 5.0));
}

/// Derivative of smooth_h: 15/16 (1 - v^2)^2 on [-1, 1], zero elsewhere.
constexpr double smooth_h_prime(double v) {
  if (v <= -1.0 || v >= 1.0) return 0.0;
  const double s = 1.0 - v * v;
  return (15.0 / 16.0) * s * s;
}

/// Smoothed hinge K_h(u) = u H(u / h). Equals max(u, 0) once |u| >= h.
constexpr double smoothed_hinge(double u, double h) { return u * smooth_h(u / h); }

}  // namespace dsdr
