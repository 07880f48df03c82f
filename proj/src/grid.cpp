#include "liblab/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace liblab::grid {

namespace {

using cd = std::complex<double>;

Eigen::VectorXcd forward(const ArrayXd& samples) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in = samples.matrix().cast<cd>();
  Eigen::VectorXcd out;
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXcd inverse(const Eigen::VectorXcd& spectrum) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.inv(out, spectrum);
  return out;
}

void require_grid(Index n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("grid size must be a power of two");
  }
}

}  // namespace

ArrayXd angles(Index n) {
  ArrayXd out(n);
  for (Index k = 0; k < n; ++k) out(k) = angle(k, n);
  return out;
}

ArrayXd cosine_moments(const ArrayXd& samples) {
  const Index n = samples.size();
  require_grid(n);
  const double h = spacing(n);
  const Eigen::VectorXcd x = forward(samples);
  ArrayXd m(n / 2);
  for (Index j = 0; j < n / 2; ++j) {
    // theta_k = -pi + h/2 + k h, so e^{-i j theta_k} = e^{i j (pi - h/2)} e^{-2 pi i j k / n}.
    const double phase = static_cast<double>(j) * (kPi - 0.5 * h);
    m(j) = h * (x(j) * std::polar(1.0, phase)).real();
  }
  return m;
}

ArrayXd synthesize_cosine(const ArrayXd& coefficients, Index n) {
  require_grid(n);
  const double h = spacing(n);
  const Index top = std::min<Index>(coefficients.size(), n / 2);
  Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(n);
  for (Index j = 0; j < top; ++j) {
    const double c = coefficients(j) / (2.0 * kPi);
    const double phase = static_cast<double>(j) * (-kPi + 0.5 * h);
    if (j == 0) {
      spec(0) = c;
    } else {
      spec(j) = c * std::polar(1.0, phase);
      spec(n - j) = c * std::polar(1.0, -phase);
    }
  }
  // Eigen's inverse carries the 1/n factor.
  const Eigen::VectorXcd f = inverse(spec) * static_cast<double>(n);
  return f.real().array();
}

ArrayXd conjugate_function(const ArrayXd& samples) {
  const Index n = samples.size();
  require_grid(n);
  Eigen::VectorXcd x = forward(samples);
  const cd minus_i(0.0, -1.0);
  x(0) = 0.0;
  x(n / 2) = 0.0;
  for (Index j = 1; j < n / 2; ++j) {
    x(j) *= minus_i;
    x(n - j) *= -minus_i;
  }
  return inverse(x).real().array();
}

double interpolate(const ArrayXd& samples, double theta) {
  const Index n = samples.size();
  const double h = spacing(n);
  // Fractional node coordinate s with theta = angle(s).
  double s = (theta + kPi) / h - 0.5;
  s -= std::floor(s / static_cast<double>(n)) * static_cast<double>(n);
  const auto base = static_cast<Index>(std::floor(s));
  const double u = s - static_cast<double>(base);
  auto at = [&](Index k) { return samples(((k % n) + n) % n); };
  const double fm = at(base - 1), f0 = at(base), f1 = at(base + 1), f2 = at(base + 2);
  // Cubic Lagrange weights on nodes -1, 0, 1, 2.
  const double wm = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w2 = (u + 1.0) * u * (u - 1.0) / 6.0;
  return wm * fm + w0 * f0 + w1 * f1 + w2 * f2;
}

}  // namespace liblab::grid
