#include "liblab/fubm.hpp"

#include <cmath>
#include <stdexcept>

namespace liblab {

namespace {

// Right-hand side of the moment recursion; c(0) does not move.
ArrayXd recursion(const ArrayXd& c) {
  const Index n_max = c.size() - 1;
  ArrayXd d = ArrayXd::Zero(c.size());
  for (Index n = 1; n <= n_max; ++n) {
    double s = 0.0;
    for (Index k = 1; k < n; ++k) s += static_cast<double>(k) * c(k) * c(n - k);
    d(n) = -0.5 * static_cast<double>(n) * c(n) - s;
  }
  return d;
}

}  // namespace

MomentVector delta_moments(Index n_max) { return {0.0, ArrayXd::Ones(n_max + 1)}; }

MomentVector moment_flow(const MomentVector& c0, double duration, double dt) {
  if (!(duration >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("moment_flow needs duration >= 0, dt > 0");
  const long steps = static_cast<long>(std::ceil(duration / dt - 1e-9));
  const double h = steps > 0 ? duration / static_cast<double>(steps) : 0.0;
  ArrayXd c = c0.c;
  for (long s = 0; s < steps; ++s) {
    const ArrayXd k1 = recursion(c);
    const ArrayXd k2 = recursion(c + 0.5 * h * k1);
    const ArrayXd k3 = recursion(c + 0.5 * h * k2);
    const ArrayXd k4 = recursion(c + h * k3);
    c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {c0.t + duration, c};
}

MomentVector moments_of(const CircleMeasure& measure, Index n_max) {
  const ArrayXd m = grid::cosine_moments(measure.density());
  if (n_max >= m.size()) throw std::invalid_argument("n_max exceeds the grid bandwidth");
  MomentVector out{0.0, ArrayXd(n_max + 1)};
  for (Index n = 0; n <= n_max; ++n) {
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    out.c(n) = 2.0 * (m(n) + measure.atom_zero() + sign * measure.atom_pi());
  }
  return out;
}

MomentVector moments_of_field(const HerglotzFunction& field, Index n_max, double radius,
                              Index samples) {
  if (!(radius > 0.0 && radius < 1.0) || samples <= 2 * n_max) {
    throw std::invalid_argument("moments_of_field needs 0 < radius < 1 and samples > 2 n_max");
  }
  // The coefficients are real, so the upper half circle suffices.
  const Index half = samples / 2;
  ArrayXd phi(half + 1);
  for (Index j = 0; j <= half; ++j) phi(j) = grid::kPi * static_cast<double>(j) / static_cast<double>(half);
  const ArrayXcd values = field.L_on_arc(radius, phi);
  MomentVector out{0.0, ArrayXd(n_max + 1)};
  for (Index n = 0; n <= n_max; ++n) {
    // Trapezoid over the full circle, folded with L(conj z) = conj L(z).
    double s = 0.0;
    for (Index j = 0; j <= half; ++j) {
      const double w = (j == 0 || j == half) ? 1.0 : 2.0;
      s += w * (values(j) * std::polar(1.0, -static_cast<double>(n) * phi(j))).real();
    }
    out.c(n) = s / (2.0 * static_cast<double>(half)) / std::pow(radius, static_cast<double>(n));
  }
  out.c(0) *= 2.0;
  return out;
}

CircleMeasure measure_from_moments(const MomentVector& moments, Index grid_size) {
  const Index n_max = moments.n_max();
  if (n_max < 1) throw std::invalid_argument("need at least one moment");
  ArrayXd coeff(n_max + 1);
  const double knee = 0.5 * static_cast<double>(n_max);
  for (Index n = 0; n <= n_max; ++n) {
    const double w = n <= knee ? 1.0 : (static_cast<double>(n_max) - n) / (static_cast<double>(n_max) - knee);
    coeff(n) = 0.5 * w * moments.c(n);
  }
  ArrayXd density = grid::synthesize_cosine(coeff, grid_size);
  const double mass = 0.5 * moments.c(0);
  density = density.max(0.0);
  const double have = grid::integrate(density);
  if (have > 0.0) density *= mass / have;
  return CircleMeasure(density);
}

}  // namespace liblab
