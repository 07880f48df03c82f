#ifndef LIBLAB_FUBM_HPP
#define LIBLAB_FUBM_HPP

#include "liblab/transforms.hpp"

// Moments of the free unitary Brownian motion started from a unitary with
// law 2 mu-hat. Recursion time t corresponds to Loewner time t / 2.

namespace liblab {

struct MomentVector {
  double t = 0.0;
  /// c(n) = integral of e^{i n theta} d(2 mu-hat), n = 0 .. n_max. c(0) is
  /// the total mass of 2 mu-hat (one for tau = 1/2).
  ArrayXd c;

  Index n_max() const { return c.size() - 1; }
};

inline constexpr Index kDefaultMoments = 32;

/// All moments equal to one: 2 mu-hat = delta_0.
MomentVector delta_moments(Index n_max = kDefaultMoments);

/// Integrates c_1' = -c_1 / 2, c_n' = -(n/2) c_n - sum_{k<n} k c_k c_{n-k}
/// by RK4 over a further `duration`.
MomentVector moment_flow(const MomentVector& c0, double duration, double dt = 1e-4);

MomentVector moments_of(const CircleMeasure& measure, Index n_max = kDefaultMoments);

/// Taylor coefficients of L around 0 (L = c_0 / 2 + sum c_n zeta^n), read
/// off a circle of the given radius. Works for evolved fields, where the
/// boundary measure is only known approximately.
MomentVector moments_of_field(const HerglotzFunction& field, Index n_max = kDefaultMoments,
                              double radius = 0.8, Index samples = 128);

/// de la Vallee-Poussin summation: weight one up to n_max / 2, then linear
/// down to zero at n_max. Negative values are clipped and the mass restored.
CircleMeasure measure_from_moments(const MomentVector& moments, Index grid_size = grid::kDefaultSize);

}  // namespace liblab

#endif  // LIBLAB_FUBM_HPP
