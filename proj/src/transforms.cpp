#include "liblab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "liblab/error.hpp"

namespace liblab {

namespace {

std::string zeta_context(cd zeta) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"re\":" << zeta.real() << ",\"im\":" << zeta.imag() << "}";
  return out.str();
}

double distance_to_unit_interval(cd z) {
  if (z.real() >= 0.0 && z.real() <= 1.0) return std::abs(z.imag());
  return std::min(std::abs(z), std::abs(z - 1.0));
}

}  // namespace

cd szego_to_disk(cd z) {
  // zeta^2 - (4z - 2) zeta + 1 = 0; the roots multiply to 1.
  const cd center = 2.0 * z - 1.0;
  const cd root = std::sqrt(center * center - 1.0);
  const cd big = std::abs(center + root) >= std::abs(center - root) ? center + root : center - root;
  const cd zeta = 1.0 / big;
  if (std::abs(zeta) >= 1.0 - 1e-14) {
    std::ostringstream ctx;
    ctx.precision(17);
    ctx << "{\"z_re\":" << z.real() << ",\"z_im\":" << z.imag() << "}";
    throw Error(ErrorCode::BranchFailure, "z lies on the slit [0, 1]", ctx.str());
  }
  return zeta;
}

cd disk_to_plane(cd zeta) { return 0.25 * (2.0 + zeta + 1.0 / zeta); }

cd trace_term(cd zeta, const TraceParams& params) {
  cd value = 0.0;
  if (const double a = params.a(); a != 0.0) value += a * (1.0 - zeta) / (1.0 + zeta);
  if (const double b = params.b(); b != 0.0) value += b * (1.0 + zeta) / (1.0 - zeta);
  return value;
}

cd trace_term_derivative(cd zeta, const TraceParams& params) {
  cd value = 0.0;
  if (const double a = params.a(); a != 0.0) value -= 2.0 * a / ((1.0 + zeta) * (1.0 + zeta));
  if (const double b = params.b(); b != 0.0) value += 2.0 * b / ((1.0 - zeta) * (1.0 - zeta));
  return value;
}

ArrayXcd HerglotzFunction::L_on_arc(double radius, const ArrayXd& angles) const {
  ArrayXcd out(angles.size());
  for (Index k = 0; k < angles.size(); ++k) out(k) = L(std::polar(radius, angles(k)));
  return out;
}

cd HerglotzFunction::H(cd zeta) const {
  const cd l = L(zeta);
  return (l + trace_term(zeta, params())) * l;
}

HerglotzField::HerglotzField(CircleMeasure measure, TraceParams params)
    : measure_(std::move(measure)), params_(params) {
  Eigen::ArrayXd m = grid::cosine_moments(measure_.density());
  m.tail(m.size() - 1) *= 2.0;
  Index degree = m.size() - 1;
  const double floor = 1e-16 * std::max(1.0, std::abs(m(0)));
  while (degree > 0 && std::abs(m(degree)) <= floor) --degree;
  coefficients_ = m.head(degree + 1);
}

cd HerglotzField::L(cd zeta) const {
  cd value = 0.0;
  for (Index n = coefficients_.size() - 1; n >= 0; --n) value = value * zeta + coefficients_(n);
  if (const double w = measure_.atom_zero(); w > 0.0) value += w * (1.0 + zeta) / (1.0 - zeta);
  if (const double w = measure_.atom_pi(); w > 0.0) value += w * (1.0 - zeta) / (1.0 + zeta);
  return value;
}

cd HerglotzField::dL(cd zeta) const {
  cd value = 0.0;
  for (Index n = coefficients_.size() - 1; n >= 1; --n) {
    value = value * zeta + static_cast<double>(n) * coefficients_(n);
  }
  if (const double w = measure_.atom_zero(); w > 0.0) value += 2.0 * w / ((1.0 - zeta) * (1.0 - zeta));
  if (const double w = measure_.atom_pi(); w > 0.0) value -= 2.0 * w / ((1.0 + zeta) * (1.0 + zeta));
  return value;
}

cd HerglotzField::psi(cd zeta) const { return L(zeta) - L(0.0); }

cd herglotz_L(const CircleMeasure& measure, cd zeta) {
  return HerglotzField(measure, TraceParams::half()).L(zeta);
}

cd herglotz_H(const HerglotzFunction& field, cd zeta) { return field.H(zeta); }

cd recover_L_from_H(cd h_value, cd zeta, const TraceParams& params, std::optional<cd> carried,
                    bool* ambiguous) {
  const cd a_term = trace_term(zeta, params);
  const cd disc = a_term * a_term + 4.0 * h_value;
  const cd root = std::sqrt(disc);
  const bool on_cut = disc.real() < 0.0 && std::abs(disc.imag()) <= 1e-14 * std::max(1.0, std::abs(disc));
  if (ambiguous) *ambiguous = on_cut;
  if (on_cut) {
    if (!carried) {
      throw Error(ErrorCode::BranchAmbiguity, "discriminant on the negative real axis",
                  zeta_context(zeta));
    }
    const cd plus = 0.5 * (-a_term + root);
    const cd minus = 0.5 * (-a_term - root);
    return std::abs(plus - *carried) <= std::abs(minus - *carried) ? plus : minus;
  }
  return 0.5 * (-a_term + root);
}

ArrayXd hilbert_transform(const ArrayXd& density) {
  ArrayXd out = grid::conjugate_function(density);
  const Index n = out.size();
  for (Index k = 0; k < n / 2; ++k) {
    const Index j = grid::mirror(k, n);
    const double odd = 0.5 * (out(k) - out(j));
    out(k) = odd;
    out(j) = -odd;
  }
  return out;
}

CircleMeasure boundary_density(const HerglotzFunction& field, Index grid_size,
                               const BoundaryLadder& ladder, BoundaryDiagnostics* diagnostics) {
  if (!grid::is_power_of_two(grid_size) || ladder.supersample < 1) {
    throw std::invalid_argument("grid size must be a power of two");
  }
  const Index m = grid_size / 2;
  const Index sub = ladder.supersample;
  const Index fine_size = grid_size * sub;
  // Arc 0, upper-half sub-nodes, pi. The endpoints are where atoms can sit.
  ArrayXd arc(m * sub + 2);
  arc(0) = 0.0;
  for (Index j = 0; j < m * sub; ++j) arc(j + 1) = grid::angle(m * sub + j, fine_size);
  arc(m * sub + 1) = grid::kPi;

  const double e1 = ladder.eps_coarse;
  const double e2 = ladder.eps_fine;
  const ArrayXcd coarse = field.L_on_arc(1.0 - e1, arc);
  const ArrayXcd fine = field.L_on_arc(1.0 - e2, arc);

  for (Index k = 0; k < arc.size(); ++k) {
    const double re1 = coarse(k).real();
    const double re2 = fine(k).real();
    if (re2 > 5.0 * re1 && e2 * re2 > 1e-6) {
      std::ostringstream ctx;
      ctx.precision(17);
      ctx << "{\"theta\":" << arc(k) << ",\"re_L_coarse\":" << re1 << ",\"re_L_fine\":" << re2
          << "}";
      throw Error(ErrorCode::DivergenceDetected, "Re L grows like 1/(1-r); the measure has an atom",
                  ctx.str());
    }
  }

  ArrayXd hat(grid_size);
  double most_negative = 0.0;
  for (Index k = 0; k < m; ++k) {
    double f1 = 0.0;
    double f2 = 0.0;
    for (Index j = k * sub; j < (k + 1) * sub; ++j) {
      f1 += coarse(j + 1).real();
      f2 += fine(j + 1).real();
    }
    f1 /= 2.0 * grid::kPi * static_cast<double>(sub);
    f2 /= 2.0 * grid::kPi * static_cast<double>(sub);
    double value = (e1 * f2 - e2 * f1) / (e1 - e2);
    most_negative = std::min(most_negative, value);
    value = std::max(value, 0.0);
    hat(m + k) = value;
    hat(grid::mirror(m + k, grid_size)) = value;
  }
  CircleMeasure out(std::move(hat));
  if (diagnostics) {
    diagnostics->most_negative = most_negative;
    diagnostics->mass = out.total_mass();
  }
  return out;
}

cd cauchy_F(const IntervalMeasure& mu, cd z) {
  if (distance_to_unit_interval(z) <= 1e-10) {
    std::ostringstream ctx;
    ctx.precision(17);
    ctx << "{\"z_re\":" << z.real() << ",\"z_im\":" << z.imag() << "}";
    throw Error(ErrorCode::TooCloseToSpectrum, "z within 1e-10 of [0, 1]", ctx.str());
  }
  const Index m = mu.grid_size();
  const double cell = grid::kPi / static_cast<double>(m);
  cd value = 0.0;
  for (Index k = 0; k < m; ++k) {
    const double theta = IntervalMeasure::node_angle(k, m);
    const double c = std::cos(0.5 * theta);
    value += mu.density()(k) * 0.5 * std::sin(theta) / (z - c * c);
  }
  value *= cell;
  if (mu.atom0() > 0.0) value += mu.atom0() / z;
  if (mu.atom1() > 0.0) value += mu.atom1() / (z - 1.0);
  return value;
}

cd cauchy_G(const IntervalMeasure& nu, cd z) { return cauchy_F(nu, z); }

PdeResidual pde_residual_G(const CauchyFlow& G, std::span<const double> times,
                           std::span<const cd> points, double dt, double dz,
                           const TraceParams& params) {
  const double p = params.tau_p();
  const double q = params.tau_q();
  auto bracket = [&](double t, cd z) {
    const cd g = G(t, z);
    return (z * z - z) * g * g + (2.0 - p - q - z) * g - (1.0 - p) * (1.0 - q) / z;
  };
  PdeResidual out;
  double total = 0.0;
  std::size_t count = 0;
  for (double t : times) {
    for (cd z : points) {
      const cd dG = (G(t + dt, z) - G(t - dt, z)) / (2.0 * dt);
      const cd dB = (bracket(t, z + dz) - bracket(t, z - dz)) / (2.0 * dz);
      const double r = std::abs(dG - dB);
      out.max = std::max(out.max, r);
      total += r;
      ++count;
    }
  }
  out.mean = count ? total / static_cast<double>(count) : 0.0;
  return out;
}

HardyDiagnostic hardy_norm_diag(const HerglotzFunction& field, Index samples) {
  HardyDiagnostic out;
  const Index half = samples / 2;
  ArrayXd arc(half);
  for (Index k = 0; k < half; ++k) arc(k) = grid::angle(half + k, samples);
  const double h = grid::spacing(samples);
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    const double r = out.radii[i];
    const ArrayXcd l = field.L_on_arc(r, arc);
    double integral = 0.0;
    for (Index k = 0; k < half; ++k) {
      const cd zeta = std::polar(r, arc(k));
      const cd hv = (l(k) + trace_term(zeta, field.params())) * l(k);
      integral += std::pow(std::abs(hv), 1.5);
    }
    // |H(conj zeta)| = |H(zeta)|, so the lower half doubles the sum.
    out.norms[i] = std::pow(2.0 * integral * h, 2.0 / 3.0);
    out.sup = std::max(out.sup, out.norms[i]);
  }
  return out;
}

}  // namespace liblab
