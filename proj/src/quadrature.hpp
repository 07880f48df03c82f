#ifndef LIBLAB_SRC_QUADRATURE_HPP
#define LIBLAB_SRC_QUADRATURE_HPP

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace liblab::quad {

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule of the given order (Newton on the three-term recurrence).
Rule gauss_legendre(int order);

template <typename F>
auto gauss(F&& f, double a, double b, const Rule& rule) {
  using R = decltype(f(a));
  R total{};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.x.size(); ++i) total += f(mid + half * rule.x[i]) * rule.w[i];
  return total * half;
}

// int_a^b f with theta = mid - half cos(phi): clusters nodes at both ends so
// that square-root endpoint behaviour is integrated to full order.
template <typename F>
double gauss_cosine(F&& f, double a, double b, const Rule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  return gauss(
      [&](double phi) { return f(mid - half * std::cos(phi)) * half * std::sin(phi); }, 0.0,
      std::numbers::pi, rule);
}

}  // namespace liblab::quad

#endif
