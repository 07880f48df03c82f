#include "liblab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "liblab/error.hpp"
#include "quadrature.hpp"

namespace liblab {

namespace {

constexpr double kAtomTolerance = 1e-8;

void require_nonnegative(const ArrayXd& values, const char* what) {
  if (!values.allFinite() || (values < 0.0).any()) {
    throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
  }
}

}  // namespace

TraceParams::TraceParams(double tau_p, double tau_q) : tau_p_(tau_p), tau_q_(tau_q) {
  if (!(tau_p > 0.0 && tau_p < 1.0 && tau_q > 0.0 && tau_q < 1.0)) {
    throw std::invalid_argument("traces must lie in the open interval (0, 1)");
  }
}

double TraceParams::a() const { return std::abs(tau_p_ - tau_q_); }
double TraceParams::b() const { return std::abs(tau_p_ + tau_q_ - 1.0); }
double TraceParams::forced_atom0() const { return 1.0 - std::min(tau_p_, tau_q_); }
double TraceParams::forced_atom1() const { return std::max(tau_p_ + tau_q_ - 1.0, 0.0); }
double TraceParams::interior_mass() const { return 0.5 * (1.0 - a() - b()); }

CircleMeasure::CircleMeasure(ArrayXd density, double atom_zero, double atom_pi)
    : density_(std::move(density)), atom_zero_(atom_zero), atom_pi_(atom_pi) {
  const Index n = density_.size();
  if (!grid::is_power_of_two(n)) {
    throw std::invalid_argument("circle grid size must be a power of two");
  }
  require_nonnegative(density_, "circle density");
  if (!(atom_zero >= 0.0 && atom_pi >= 0.0)) {
    throw std::invalid_argument("atom weights must be nonnegative");
  }
  for (Index k = 0; k < n / 2; ++k) {
    const Index j = grid::mirror(k, n);
    const double even = 0.5 * (density_(k) + density_(j));
    density_(k) = even;
    density_(j) = even;
  }
}

CircleMeasure CircleMeasure::zero(Index grid_size) {
  return CircleMeasure(ArrayXd::Zero(grid_size));
}

CircleMeasure CircleMeasure::atoms(double atom_zero, double atom_pi, Index grid_size) {
  return CircleMeasure(ArrayXd::Zero(grid_size), atom_zero, atom_pi);
}

IntervalMeasure::IntervalMeasure(ArrayXd density, double atom0, double atom1)
    : density_(std::move(density)), atom0_(atom0), atom1_(atom1) {
  if (!grid::is_power_of_two(density_.size())) {
    throw std::invalid_argument("interval grid size must be a power of two");
  }
  require_nonnegative(density_, "interval density");
  if (!(atom0 >= 0.0 && atom1 >= 0.0)) {
    throw std::invalid_argument("atom weights must be nonnegative");
  }
}

double IntervalMeasure::node_angle(Index k, Index m) {
  return grid::kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
}

ArrayXd IntervalMeasure::nodes(Index m) {
  ArrayXd x(m);
  for (Index k = 0; k < m; ++k) {
    const double c = std::cos(0.5 * node_angle(k, m));
    x(k) = c * c;
  }
  return x;
}

double IntervalMeasure::density_mass() const {
  const Index m = grid_size();
  double total = 0.0;
  for (Index k = 0; k < m; ++k) total += density_(k) * std::sin(node_angle(k, m));
  return 0.5 * total * grid::kPi / static_cast<double>(m);
}

double IntervalMeasure::cdf(double x, bool left) const {
  if (x < 0.0 || (left && x == 0.0)) return 0.0;
  if (x > 1.0) return total_mass();
  double value = atom0_;
  if (x >= 1.0) {
    value += density_mass();
    if (!left) value += atom1_;
    return value;
  }
  // Points below x are the angles above theta(x); cells are [pi k/m, pi (k+1)/m].
  const Index m = grid_size();
  const double cell = grid::kPi / static_cast<double>(m);
  const double theta_x = 2.0 * std::acos(std::sqrt(x));
  double interior = 0.0;
  for (Index k = m - 1; k >= 0; --k) {
    const double lo = cell * static_cast<double>(k);
    const double hi = lo + cell;
    if (hi <= theta_x) break;
    const double mass = 0.5 * density_(k) * std::sin(node_angle(k, m)) * cell;
    interior += lo >= theta_x ? mass : mass * (hi - theta_x) / cell;
  }
  return value + interior;
}

Decomposition decompose(const IntervalMeasure& nu, const TraceParams& params) {
  if (std::abs(nu.total_mass() - 1.0) > 1e-6) {
    throw std::invalid_argument("nu must be a probability measure");
  }
  double rest0 = nu.atom0() - params.forced_atom0();
  double rest1 = nu.atom1() - params.forced_atom1();
  if (rest0 < -kAtomTolerance || rest1 < -kAtomTolerance) {
    std::ostringstream ctx;
    ctx.precision(17);
    ctx << "{\"atom0\":" << nu.atom0() << ",\"atom1\":" << nu.atom1()
        << ",\"tau_p\":" << params.tau_p() << ",\"tau_q\":" << params.tau_q() << "}";
    throw Error(ErrorCode::NegativeMass, "atoms of nu smaller than the forced weights",
                ctx.str());
  }
  rest0 = rest0 <= kAtomTolerance ? 0.0 : rest0;
  rest1 = rest1 <= kAtomTolerance ? 0.0 : rest1;
  const bool generic = rest0 == 0.0 && rest1 == 0.0;
  return {IntervalMeasure(nu.density(), rest0, rest1), generic};
}

CircleMeasure to_circle(const IntervalMeasure& mu) {
  const Index m = mu.grid_size();
  const Index n = 2 * m;
  ArrayXd hat(n);
  for (Index k = 0; k < m; ++k) {
    // hat h(theta) = h(cos^2(theta/2)) |sin theta| / 4
    const double value = 0.25 * mu.density()(k) * std::sin(IntervalMeasure::node_angle(k, m));
    hat(m + k) = value;
    hat(grid::mirror(m + k, n)) = value;
  }
  return CircleMeasure(std::move(hat), mu.atom1(), mu.atom0());
}

IntervalMeasure from_circle(const CircleMeasure& hat_mu, const TraceParams& params) {
  const Index n = hat_mu.grid_size();
  const Index m = n / 2;
  ArrayXd h(m);
  for (Index k = 0; k < m; ++k) {
    h(k) = 4.0 * hat_mu.density()(m + k) / std::sin(IntervalMeasure::node_angle(k, m));
  }
  return IntervalMeasure(std::move(h), params.forced_atom0() + hat_mu.atom_pi(),
                         params.forced_atom1() + hat_mu.atom_zero());
}

double free_pair_density(double x, const TraceParams& params) {
  const double p = params.tau_p();
  const double q = params.tau_q();
  const double center = p + q - 2.0 * p * q;
  const double radius = 2.0 * std::sqrt(p * q * (1.0 - p) * (1.0 - q));
  const double alpha = center - radius;
  const double beta = center + radius;
  if (x <= alpha || x >= beta || x <= 0.0 || x >= 1.0) return 0.0;
  return std::sqrt((beta - x) * (x - alpha)) / (2.0 * grid::kPi * x * (1.0 - x));
}

CircleMeasure free_pair_measure(const TraceParams& params, Index grid_size) {
  // Cell masses, so that the square-root edges do not cost accuracy.
  const double p = params.tau_p();
  const double q = params.tau_q();
  const double center = p + q - 2.0 * p * q;
  const double radius = 2.0 * std::sqrt(p * q * (1.0 - p) * (1.0 - q));
  const double theta_lo = 2.0 * std::acos(std::sqrt(std::min(center + radius, 1.0)));
  const double theta_hi = 2.0 * std::acos(std::sqrt(std::max(center - radius, 0.0)));
  // hat h = sqrt((beta - x)(x - alpha)) / (2 pi sin theta), written with
  // cos^2 and sin^2 of theta/2 to keep digits near the endpoints.
  auto hat = [&](double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const double above = c * c - (center - radius);
    const double below = (center + radius) - 1.0 + s * s;
    if (above <= 0.0 || below <= 0.0) return 0.0;
    return std::sqrt(above * below) / (2.0 * grid::kPi * std::sin(theta));
  };
  static const quad::Rule rule = quad::gauss_legendre(16);
  const Index m = grid_size / 2;
  const double cell = grid::kPi / static_cast<double>(m);
  ArrayXd values(grid_size);
  for (Index k = 0; k < m; ++k) {
    const double lo = std::max(cell * static_cast<double>(k), theta_lo);
    const double hi = std::min(cell * static_cast<double>(k + 1), theta_hi);
    const double mass = hi > lo ? quad::gauss_cosine(hat, lo, hi, rule) : 0.0;
    values(m + k) = mass / cell;
    values(grid::mirror(m + k, grid_size)) = mass / cell;
  }
  return CircleMeasure(std::move(values));
}

}  // namespace liblab
