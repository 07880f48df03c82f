#ifndef LIBLAB_TESTS_ORACLES_HPP
#define LIBLAB_TESTS_ORACLES_HPP

// Reference computations used only by the tests. None of these touch the
// FFT path or the polynomial Herglotz evaluator of the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Composite Gauss-Legendre on [a, b].
template <typename F>
auto gauss(F&& f, double a, double b, int panels = 64, int order = 20) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  using R = decltype(f(a));
  R total{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) total += f(lo + 0.5 * h * (x[i] + 1.0)) * (0.5 * h * w[i]);
  }
  return total;
}

// (1/2pi) PV int f(phi) / tan((theta - phi)/2) dphi, with nodes placed
// symmetrically around theta at half-cell offsets so no node is singular.
inline double pv_conjugate(const std::function<double(double)>& f, double theta, int nodes = 4096) {
  const double h = 2.0 * pi / nodes;
  double sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double u = (j + 0.5) * h;  // theta - phi
    sum += f(theta - u) / std::tan(0.5 * u);
  }
  return sum * h / (2.0 * pi);
}

// Herglotz integral of a continuous density on (-pi, pi] by a fine
// periodic rule.
inline cd herglotz(const std::function<double(double)>& density, cd zeta, int nodes = 1 << 15) {
  const double h = 2.0 * pi / nodes;
  cd sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double th = -pi + j * h;
    const cd e = std::polar(1.0, th);
    sum += (e + zeta) / (e - zeta) * density(th);
  }
  return sum * h;
}

// int_0^1 h(x) / (z - x) dx for h with inverse square-root endpoint behaviour,
// after x = (1 - cos u)/2.
inline cd cauchy_sqrt_edges(const std::function<double(double)>& h, cd z) {
  return gauss(
      [&](double u) -> cd {
        const double x = 0.5 * (1.0 - std::cos(u));
        return h(x) * 0.5 * std::sin(u) / (z - x);
      },
      0.0, pi, 64, 20);
}

// int int log|e^{i a} - e^{i b}| rho(a) rho(b) da db for a continuous
// density. The inner integral runs over u = b - a with u = v^2 near 0 and
// u = 2 pi - v^2 near 2 pi, which removes the log singularity.
inline double log_energy_brute(const std::function<double(double)>& rho) {
  const double root = std::sqrt(pi);
  auto inner = [&](double a) {
    return gauss(
        [&](double v) {
          const double u = v * v;
          const double k = std::log(2.0 * std::sin(0.5 * u)) * 2.0 * v;
          return k * (rho(a + u) + rho(a - u));
        },
        0.0, root, 16, 20);
  };
  return gauss([&](double a) { return rho(a) * inner(a); }, -pi, pi, 32, 20);
}

}  // namespace oracle

#endif
