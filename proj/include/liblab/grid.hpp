#ifndef LIBLAB_GRID_HPP
#define LIBLAB_GRID_HPP

#include <Eigen/Core>

#include <numbers>

// Uniform periodic grid on the circle and the FFT kernels built on it.
//
// Nodes sit at cell midpoints, theta_k = -pi + (k + 1/2) * 2pi/N, so that
// neither theta = 0 nor theta = pi is a node. Mirror symmetry theta -> -theta
// maps node k to node N-1-k.

namespace liblab::grid {

using Eigen::ArrayXd;
using Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Index kDefaultSize = 4096;

constexpr bool is_power_of_two(Index n) { return n > 1 && (n & (n - 1)) == 0; }

inline double spacing(Index n) { return 2.0 * kPi / static_cast<double>(n); }

inline double angle(Index k, Index n) {
  return -kPi + (static_cast<double>(k) + 0.5) * spacing(n);
}

inline Index mirror(Index k, Index n) { return n - 1 - k; }

ArrayXd angles(Index n);

// m_n = sum_k f_k cos(n theta_k) dtheta for n = 0 .. N/2 - 1. For an even
// density these are the (real) Fourier moments of f(theta) dtheta.
ArrayXd cosine_moments(const ArrayXd& samples);

// Inverse of cosine_moments for band-limited even data:
// f(theta_k) = (c_0 + 2 sum_{n>=1} c_n cos(n theta_k)) / (2 pi).
ArrayXd synthesize_cosine(const ArrayXd& coefficients, Index n);

// Conjugate function via the multiplier e^{in theta} -> -i sgn(n) e^{in theta}.
ArrayXd conjugate_function(const ArrayXd& samples);

// Periodic trapezoid rule (all weights equal on the midpoint grid).
inline double integrate(const ArrayXd& samples) {
  return samples.sum() * spacing(samples.size());
}

// Four-point Lagrange interpolation of periodic grid data at an arbitrary angle.
double interpolate(const ArrayXd& samples, double theta);

}  // namespace liblab::grid

#endif  // LIBLAB_GRID_HPP
