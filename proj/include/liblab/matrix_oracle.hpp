#ifndef LIBLAB_MATRIX_ORACLE_HPP
#define LIBLAB_MATRIX_ORACLE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "liblab/measures.hpp"

namespace liblab {

struct MatrixModelConfig {
  Index n = 500;
  double tau_p = 0.5;
  double tau_q = 0.5;
  double dt = 1e-3;
  double t_end = 1.0;
  int samples = 8;
  std::uint64_t seed = 1;

  Index rank_p() const;
  Index rank_q() const;
  /// Throws std::invalid_argument.
  void validate() const;
};

/// Starting pair (P, Q). `free` puts Q in a Haar-random position, `aligned`
/// takes both diagonal so that the smaller range sits inside the larger.
struct InitialPair {
  enum class Kind { free, aligned, explicit_pair };
  Kind kind = Kind::free;
  Eigen::MatrixXcd p;  // explicit_pair only
  Eigen::MatrixXcd q;

  static InitialPair free_pair() { return {}; }
  static InitialPair aligned() { return {Kind::aligned, {}, {}}; }
  static InitialPair explicit_pair(Eigen::MatrixXcd p, Eigen::MatrixXcd q) {
    return {Kind::explicit_pair, std::move(p), std::move(q)};
  }
};

/// Eigenvalues of Q U_t P U_t* Q at one time. Replica r occupies
/// [r n, (r + 1) n), sorted ascending within the block.
struct SpectrumSnapshot {
  double t = 0.0;
  Index n = 0;
  std::vector<double> eigenvalues;

  int replicas() const { return n == 0 ? 0 : static_cast<int>(eigenvalues.size() / n); }
  /// Eigenvalue sum over n, averaged over replicas.
  double mean_trace() const;
};

struct EmpiricalSpectrum {
  MatrixModelConfig config;
  std::vector<SpectrumSnapshot> snapshots;
  /// Largest ||W* W - I||_inf seen after re-orthonormalization, where W is
  /// the isometry U_t restricted to the range of P.
  double unitarity_drift = 0.0;
};

/// Monte Carlo run. `times` must be multiples of dt in [0, t_end]; an empty
/// list means {t_end}. Throws TimeGridMismatch otherwise.
EmpiricalSpectrum simulate_spectrum(const MatrixModelConfig& config,
                                    const InitialPair& initial = InitialPair::free_pair(),
                                    std::vector<double> times = {});

/// Kolmogorov-Smirnov distance between the pooled sample and nu, atoms
/// included as jumps of the CDF.
double ks_distance(const std::vector<double>& sample, const IntervalMeasure& nu);
double ks_distance(const std::vector<double>& a, const std::vector<double>& b);

struct TimedLaw {
  double t = 0.0;
  IntervalMeasure nu;
};

/// KS distance per snapshot. The time lists must agree to 1e-12.
std::vector<double> compare_to_flow(const std::vector<SpectrumSnapshot>& empirical,
                                    const std::vector<TimedLaw>& analytic);

/// nu_t of the flow started from mu0 (mu0 itself at t = 0).
IntervalMeasure flow_law(const CircleMeasure& mu0, const TraceParams& params, double t);

/// Rows t,eigenvalue_index,value with 17 significant digits.
void write_snapshots_csv(std::ostream& out, const std::vector<SpectrumSnapshot>& snapshots);

}  // namespace liblab

#endif  // LIBLAB_MATRIX_ORACLE_HPP
