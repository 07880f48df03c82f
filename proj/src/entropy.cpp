#include "liblab/entropy.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "liblab/error.hpp"
#include "quadrature.hpp"

namespace liblab {

namespace {

const quad::Rule& rule16() {
  static const quad::Rule r = quad::gauss_legendre(16);
  return r;
}

void require_density(const CircleMeasure& measure) {
  if (measure.has_atoms()) {
    std::ostringstream ctx;
    ctx.precision(17);
    ctx << "{\"atom_zero\":" << measure.atom_zero() << ",\"atom_pi\":" << measure.atom_pi() << "}";
    throw Error(ErrorCode::AtomPresent, "fisher information needs a density", ctx.str());
  }
}

// log(2 |cos(theta/2)|) on [a, b] inside [0, pi]; the singular cell touching
// pi is integrated in u with theta = pi - u^2.
double log_plus_cell(double a, double b) {
  auto f = [](double th) { return std::log(2.0 * std::cos(0.5 * th)); };
  if (b < grid::kPi) return quad::gauss(f, a, b, rule16());
  return quad::gauss(
      [](double u) { return std::log(2.0 * std::sin(0.5 * u * u)) * 2.0 * u; }, 0.0,
      std::sqrt(grid::kPi - a), rule16());
}

// log(2 |sin(theta/2)|) on [a, b] inside [0, pi], singular at 0.
double log_minus_cell(double a, double b) {
  auto f = [](double th) { return std::log(2.0 * std::sin(0.5 * th)); };
  if (a > 0.0) return quad::gauss(f, a, b, rule16());
  return quad::gauss([](double u) { return std::log(2.0 * std::sin(0.5 * u * u)) * 2.0 * u; },
                     0.0, std::sqrt(b), rule16());
}

double upper_half_integral(const CircleMeasure& measure, double (*cell)(double, double)) {
  const Index n = measure.grid_size();
  const double h = grid::spacing(n);
  double total = 0.0;
  for (Index k = n / 2; k < n; ++k) {
    const double lo = static_cast<double>(k - n / 2) * h;
    total += measure.density()(k) * cell(lo, lo + h);
  }
  return 2.0 * total;
}

// Integral of log|1 - s e^{i phi}| over [a, b] with 0 <= a < b, graded
// towards phi = 0 where the kernel has width 1 - s.
double regularized_kernel(double s, double a, double b) {
  auto f = [s](double phi) {
    const double half = std::sin(0.5 * phi);
    return 0.5 * std::log((1.0 - s) * (1.0 - s) + 4.0 * s * half * half);
  };
  const double width = std::max(1.0 - s, 1e-12);
  if (a > 4.0 * (b - a) || a > 64.0 * width) return quad::gauss(f, a, b, rule16());
  double total = 0.0;
  double lo = a;
  double step = std::max(width * 1e-3, a);
  if (a == 0.0) {
    total += quad::gauss(f, 0.0, std::min(step, b), rule16());
    lo = std::min(step, b);
  }
  while (lo < b) {
    const double hi = std::min(b, 2.0 * lo);
    total += quad::gauss(f, lo, hi, rule16());
    lo = hi;
  }
  return total;
}

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

ArrayXd liberation_gradient_k(const ArrayXd& hat_h, const TraceParams& params) {
  const Index n = hat_h.size();
  ArrayXd k = 2.0 * grid::kPi * hilbert_transform(2.0 * hat_h);
  if (params.a() != 0.0 || params.b() != 0.0) {
    const ArrayXd half = 0.5 * grid::angles(n);
    k += -params.a() * half.tan() + params.b() / half.tan();
  }
  // Exactly odd: the upper half is the master copy.
  for (Index j = 0; j < n / 2; ++j) k(j) = -k(grid::mirror(j, n));
  return k;
}

double fisher_info(const CircleMeasure& measure, const TraceParams& params) {
  require_density(measure);
  const ArrayXd& h = measure.density();
  const Index n = h.size();
  const ArrayXd k = liberation_gradient_k(h, params);
  const ArrayXd integrand = k.square() * 2.0 * h;
  const double total = grid::integrate(integrand);
  // A pole term facing density that does not vanish there: the cells next
  // to the pole carry a share that grows with the grid instead of shrinking.
  auto pole_share = [&](Index a, Index b) {
    return (integrand(a) + integrand(b)) * grid::spacing(n) / std::max(total, 1e-300);
  };
  const bool a_pole = params.a() > 0.0 && pole_share(0, n - 1) > 0.25;
  const bool b_pole = params.b() > 0.0 && pole_share(n / 2 - 1, n / 2) > 0.25;
  if (a_pole || b_pole || !std::isfinite(total)) return kInfinity;
  return total;
}

PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values) {
  const std::size_t n = times.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(times[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double m = static_cast<double>(n);
  const double cxx = sxx - sx * sx / m;
  const double cxy = sxy - sx * sy / m;
  const double cyy = syy - sy * sy / m;
  PowerLawFit fit;
  fit.exponent = cxy / cxx;
  fit.r_squared = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  return fit;
}

IStarResult i_star_detail(const CircleMeasure& mu0, const TraceParams& params,
                          const IStarOptions& options) {
  IStarResult result;
  std::map<double, double> cache;
  EvolveOptions evolve_options;
  evolve_options.grid_size = options.grid_size;
  auto phi = [&](double t) {
    if (auto it = cache.find(t); it != cache.end()) return it->second;
    double value;
    if (t == 0.0) {
      value = fisher_info(mu0, params);
    } else {
      const FlowState state = evolve(mu0, params, t, evolve_options);
      result.diagnostics += state.diagnostics;
      value = fisher_info(state.measure, params);
    }
    ++result.evaluations;
    cache.emplace(t, value);
    return value;
  };

  // Small-time behaviour: phi* ~ t^p with p <= -1 is not integrable.
  std::vector<double> fit_t, fit_phi;
  for (int i = 0; i < options.fit_samples; ++i) {
    const double u = static_cast<double>(i) / (options.fit_samples - 1);
    const double t = options.fit_lo * std::pow(options.fit_hi / options.fit_lo, u);
    const double v = phi(t);
    if (!std::isfinite(v)) {
      result.value = kInfinity;
      result.profile.divergent_at_zero = true;
    }
    fit_t.push_back(t);
    fit_phi.push_back(std::max(v, 1e-300));
  }
  result.fit = fit_power_law(fit_t, fit_phi);
  if (result.fit.exponent <= options.fit_exponent && result.fit.r_squared >= options.fit_r_squared) {
    result.profile.divergent_at_zero = true;
  }
  if (result.profile.divergent_at_zero) {
    result.value = kInfinity;
    for (const auto& [t, v] : cache) {
      result.profile.times.push_back(t);
      result.profile.phi_star.push_back(v);
    }
    return result;
  }

  // Without a density at t = 0 the integral starts at the first fit sample.
  const double lower = mu0.has_atoms() ? options.fit_lo : 0.0;
  double cut = std::max(1.0, 2.0 * lower);
  while (phi(cut) >= options.tol && cut < options.t_max) cut = std::min(2.0 * cut, options.t_max);
  result.cut = cut;

  double error = 0.0;
  auto adaptive = [&](auto&& self, double a, double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) -> double {
    const double m = 0.5 * (a + b);
    const double flm = phi(0.5 * (a + m));
    const double frm = phi(0.5 * (m + b));
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth >= options.max_depth || std::abs(delta) <= 15.0 * tol) {
      error += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return self(self, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           self(self, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  };
  const double fa = phi(lower), fb = phi(cut), fm = phi(0.5 * (lower + cut));
  // Half of the integral is wanted, so the raw tolerance is doubled.
  const double integral =
      adaptive(adaptive, lower, cut, fa, fm, fb, simpson(fa, fm, fb, lower, cut), 2.0 * options.tol, 0);
  if (!std::isfinite(integral)) {
    result.value = kInfinity;
  } else {
    result.value = 0.5 * integral;
    const double before = phi(0.5 * cut);
    const double rate = before > fb && fb > 0.0 ? std::log(before / fb) / (0.5 * cut) : 0.0;
    result.tail = rate > 0.0 ? 0.5 * fb / rate : 0.5 * fb * cut;
    result.error = 0.5 * error + result.tail;
    if (mu0.has_atoms()) result.error += 0.5 * phi(lower) * lower;
  }
  for (const auto& [t, v] : cache) {
    result.profile.times.push_back(t);
    result.profile.phi_star.push_back(v);
  }
  return result;
}

double i_star(const CircleMeasure& mu0, const TraceParams& params, double t_max, double tol) {
  IStarOptions options;
  options.t_max = t_max;
  options.tol = tol;
  return i_star_detail(mu0, params, options).value;
}

double log_energy(const CircleMeasure& measure) {
  const ArrayXd m = grid::cosine_moments(measure.density());
  double total = 0.0;
  // Smallest terms first.
  for (Index n = m.size() - 1; n >= 1; --n) total -= m(n) * m(n) / static_cast<double>(n);
  return total;
}

double log_energy_regularized(const CircleMeasure& measure, double s) {
  const ArrayXd& h = measure.density();
  const Index n = h.size();
  const double step = grid::spacing(n);
  // Kernel integrated over the cell at offset j; symmetric in j.
  ArrayXd kernel(n);
  for (Index j = 0; j <= n / 2; ++j) {
    const double centre = static_cast<double>(j) * step;
    double value;
    if (j == 0) {
      value = 2.0 * regularized_kernel(s, 0.0, 0.5 * step);
    } else {
      value = regularized_kernel(s, centre - 0.5 * step, centre + 0.5 * step);
    }
    kernel(j) = value;
    if (j > 0 && j < n) kernel(n - j) = value;
  }
  double total = 0.0;
  for (Index k = 0; k < n; ++k) {
    if (h(k) == 0.0) continue;
    double row = 0.0;
    for (Index l = 0; l < n; ++l) row += h(l) * kernel((k - l + n) % n);
    total += h(k) * row;
  }
  return total * step;
}

double log_plus_integral(const CircleMeasure& measure) {
  return upper_half_integral(measure, log_plus_cell);
}

double log_minus_integral(const CircleMeasure& measure) {
  return upper_half_integral(measure, log_minus_cell);
}

double braced_functional(const CircleMeasure& measure, const TraceParams& params) {
  double value = log_energy(measure);
  if (params.a() != 0.0) value += params.a() * log_plus_integral(measure);
  if (params.b() != 0.0) value += params.b() * log_minus_integral(measure);
  return value;
}

double calibrate_Z(const TraceParams& params) {
  static std::mutex guard;
  static std::map<std::pair<double, double>, double> memo;
  const std::pair key{params.tau_p(), params.tau_q()};
  {
    std::lock_guard lock(guard);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const double z = -2.0 * braced_functional(free_pair_measure(params), params);
  std::lock_guard lock(guard);
  memo.emplace(key, z);
  return z;
}

double chi_orb(const CircleMeasure& measure, const TraceParams& params, bool generic) {
  if (!generic || measure.has_atoms()) return -kInfinity;
  return 2.0 * braced_functional(measure, params) + calibrate_Z(params);
}

IdentityReport verify_identity(const CircleMeasure& mu0, const TraceParams& params,
                               const IStarOptions& options) {
  IdentityReport report;
  report.detail = i_star_detail(mu0, params, options);
  report.i_star = report.detail.value;
  report.chi_orb = chi_orb(mu0, params, !mu0.has_atoms());
  report.both_infinite = std::isinf(report.i_star) && std::isinf(report.chi_orb) &&
                         report.i_star > 0.0 && report.chi_orb < 0.0;
  if (report.both_infinite) {
    report.gap = 0.0;
  } else {
    report.gap = std::abs(report.i_star + report.chi_orb);
  }
  return report;
}

}  // namespace liblab
