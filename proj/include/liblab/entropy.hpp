#ifndef LIBLAB_ENTROPY_HPP
#define LIBLAB_ENTROPY_HPP

#include <limits>
#include <vector>

#include "liblab/loewner.hpp"

namespace liblab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// k = 2 pi H(2 h) - a tan(theta/2) + b cot(theta/2) on the grid. Odd.
ArrayXd liberation_gradient_k(const ArrayXd& hat_h, const TraceParams& params);

/// phi* = integral of k^2 (2 h) dtheta. +inf when a tan or b cot meets
/// density that does not vanish at its pole. Throws AtomPresent.
double fisher_info(const CircleMeasure& measure, const TraceParams& params);

struct FisherProfile {
  std::vector<double> times;
  std::vector<double> phi_star;
  bool divergent_at_zero = false;
};

struct PowerLawFit {
  double exponent = 0.0;
  double r_squared = 0.0;
};

/// Least squares line through (log t, log phi).
PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values);

struct IStarOptions {
  double t_max = 64.0;
  double tol = 1e-6;
  /// Grid of the evolved measures; 0 keeps that of mu0.
  Index grid_size = 0;
  int max_depth = 18;
  /// Divergence test: samples in [fit_lo, fit_hi], non-integrable when the
  /// exponent is at most fit_exponent with r^2 above fit_r_squared.
  double fit_lo = 1e-4;
  double fit_hi = 1e-2;
  int fit_samples = 9;
  double fit_exponent = -0.95;
  double fit_r_squared = 0.999;
};

struct IStarResult {
  double value = 0.0;  // +inf when divergent
  /// Simpson estimate plus the exponential tail beyond the cut.
  double error = 0.0;
  double tail = 0.0;
  double cut = 0.0;  // time where phi* fell below tol, or t_max
  PowerLawFit fit;
  FisherProfile profile;
  long evaluations = 0;
  FlowDiagnostics diagnostics;
};

/// i* = 1/2 integral_0^inf phi*(t) dt along the Loewner flow of mu0.
IStarResult i_star_detail(const CircleMeasure& mu0, const TraceParams& params,
                          const IStarOptions& options = {});
double i_star(const CircleMeasure& mu0, const TraceParams& params, double t_max = 64.0,
              double tol = 1e-6);

/// Double log-energy of mu-hat, - sum_{n>=1} m_n^2 / n.
double log_energy(const CircleMeasure& measure);
/// Same with log|1 - s e^{i(alpha - beta)}|, by direct double quadrature
/// with cell-integrated kernel.
double log_energy_regularized(const CircleMeasure& measure, double s);
/// Integrals of log|1 + e^{i theta}| and log|1 - e^{i theta}| against mu-hat.
double log_plus_integral(const CircleMeasure& measure);
double log_minus_integral(const CircleMeasure& measure);

/// E + a I+ + b I-.
double braced_functional(const CircleMeasure& measure, const TraceParams& params);

/// Z with chi_orb of the free pair equal to zero; memoized.
double calibrate_Z(const TraceParams& params);

/// -inf when not generic or when atoms are present.
double chi_orb(const CircleMeasure& measure, const TraceParams& params, bool generic = true);

struct IdentityReport {
  double i_star = 0.0;
  double chi_orb = 0.0;
  double gap = 0.0;  // |i* + chi_orb|, 0 when both sides are infinite
  bool both_infinite = false;
  IStarResult detail;
};

IdentityReport verify_identity(const CircleMeasure& mu0, const TraceParams& params,
                               const IStarOptions& options = {});

}  // namespace liblab

#endif  // LIBLAB_ENTROPY_HPP
