#include "liblab/matrix_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "liblab/error.hpp"
#include "liblab/loewner.hpp"
#include "liblab/parallel.hpp"

namespace liblab {

namespace {

using Eigen::MatrixXcd;
using cd = std::complex<double>;

constexpr int kTaylorDegree = 6;
constexpr double kSnap = 1e-9;
constexpr double kOrthoTarget = 1e-13;

Index rank_of(double tau, Index n) { return static_cast<Index>(std::llround(tau * static_cast<double>(n))); }

// Steps of dt reaching t, or -1 when t is not on the grid.
long step_index(double t, double dt) {
  const double k = t / dt;
  const double r = std::round(k);
  return std::abs(k - r) <= 1e-9 * std::max(1.0, r) ? static_cast<long>(r) : -1;
}

std::mt19937_64 replica_engine(std::uint64_t seed, int replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica)};
  return std::mt19937_64(seq);
}

// Diagonal N(0, 1/n), off-diagonal (a + ib)/sqrt(2n).
void sample_gue(MatrixXcd& g, std::mt19937_64& rng) {
  const Index n = g.rows();
  std::normal_distribution<double> normal;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double off = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    g(j, j) = sd * normal(rng);
    for (Index i = j + 1; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cd(off * re, off * im);
      g(j, i) = std::conj(g(i, j));
    }
  }
}

// First k columns of a Haar unitary: QR of a Ginibre block with the phases
// of diag(R) divided out.
MatrixXcd haar_columns(Index n, Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXcd z(n, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = cd(re, im);
    }
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n, k);
  const MatrixXcd& r = qr.matrixQR();
  for (Index j = 0; j < k; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

// Orthonormal basis of the range of a Hermitian projection.
MatrixXcd range_basis(const MatrixXcd& p) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (p + p.adjoint()));
  const Eigen::VectorXd& values = eig.eigenvalues();
  Index count = 0;
  for (Index i = 0; i < values.size(); ++i) count += values(i) > 0.5;
  return eig.eigenvectors().rightCols(count);
}

double ortho_defect(const MatrixXcd& w) {
  MatrixXcd gram = w.adjoint() * w;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().rowwise().sum().maxCoeff();
}

// Newton-Schulz steps towards the polar factor. Returns the final defect.
double reorthonormalize(MatrixXcd& w) {
  double defect = ortho_defect(w);
  for (int it = 0; it < 4 && defect > kOrthoTarget; ++it) {
    MatrixXcd gram = w.adjoint() * w;
    gram = -gram;
    gram.diagonal().array() += 3.0;
    w = 0.5 * (w * gram);
    defect = ortho_defect(w);
  }
  return defect;
}

// w <- exp(i s G) w by Taylor series applied to the block.
void exponential_step(const MatrixXcd& g, double s, MatrixXcd& w, MatrixXcd& term, MatrixXcd& scratch) {
  term = w;
  for (int k = 1; k <= kTaylorDegree; ++k) {
    scratch.noalias() = g * term;
    term = scratch * cd(0.0, s / k);
    w += term;
  }
}

// Spectrum of Q W W* Q padded with zeros to n, sorted.
std::vector<double> compression_spectrum(const MatrixXcd& vq, const MatrixXcd& w, Index n) {
  const MatrixXcd b = vq.adjoint() * w;  // rq x rp
  const MatrixXcd gram = b.rows() <= b.cols() ? MatrixXcd(b * b.adjoint()) : MatrixXcd(b.adjoint() * b);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const Eigen::VectorXd& v = eig.eigenvalues();
  const std::size_t offset = static_cast<std::size_t>(n - v.size());
  for (Index i = 0; i < v.size(); ++i) {
    double x = v(i);
    if (x < kSnap) x = 0.0;
    if (x > 1.0 - kSnap) x = 1.0;
    out[offset + static_cast<std::size_t>(i)] = x;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Index MatrixModelConfig::rank_p() const { return rank_of(tau_p, n); }
Index MatrixModelConfig::rank_q() const { return rank_of(tau_q, n); }

void MatrixModelConfig::validate() const {
  if (n < 2) throw std::invalid_argument("matrix size must be at least 2");
  if (!(tau_p > 0.0 && tau_p < 1.0 && tau_q > 0.0 && tau_q < 1.0))
    throw std::invalid_argument("traces must lie in (0, 1)");
  for (Index r : {rank_p(), rank_q()})
    if (r < 1 || r > n - 1) throw std::invalid_argument("projection ranks must lie in [1, n - 1]");
  if (!(dt > 0.0 && dt <= 1e-2)) throw std::invalid_argument("dt must lie in (0, 1e-2]");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite and nonnegative");
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
}

double SpectrumSnapshot::mean_trace() const {
  if (eigenvalues.empty()) return 0.0;
  double sum = 0.0;
  for (double x : eigenvalues) sum += x;
  return sum / static_cast<double>(eigenvalues.size());
}

EmpiricalSpectrum simulate_spectrum(const MatrixModelConfig& config, const InitialPair& initial,
                                    std::vector<double> times) {
  config.validate();
  if (times.empty()) times.push_back(config.t_end);
  std::sort(times.begin(), times.end());
  std::vector<long> steps;
  for (double t : times) {
    const long k = step_index(t, config.dt);
    if (k < 0 || t < 0.0 || t > config.t_end * (1.0 + 1e-12)) {
      std::ostringstream ctx;
      ctx << std::setprecision(17) << "{\"t\":" << t << ",\"dt\":" << config.dt << ",\"t_end\":" << config.t_end
          << "}";
      throw Error(ErrorCode::TimeGridMismatch, "snapshot time is not a step of the Euler grid", ctx.str());
    }
    steps.push_back(k);
  }

  const Index n = config.n;
  if (initial.kind == InitialPair::Kind::explicit_pair &&
      (initial.p.rows() != n || initial.p.cols() != n || initial.q.rows() != n || initial.q.cols() != n)) {
    throw std::invalid_argument("explicit projections must be n x n");
  }

  EmpiricalSpectrum result;
  result.config = config;
  result.snapshots.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    result.snapshots[i].t = times[i];
    result.snapshots[i].n = n;
    result.snapshots[i].eigenvalues.assign(static_cast<std::size_t>(n) * config.samples, 0.0);
  }
  std::vector<double> drift(static_cast<std::size_t>(config.samples), 0.0);
  const double s = std::sqrt(config.dt);

  parallel_chunks(0, config.samples, [&](long lo, long hi) {
    for (long r = lo; r < hi; ++r) {
      std::mt19937_64 rng = replica_engine(config.seed, static_cast<int>(r));
      MatrixXcd w, vq;
      switch (initial.kind) {
        case InitialPair::Kind::free:
          w = MatrixXcd::Identity(n, config.rank_p());
          vq = haar_columns(n, config.rank_q(), rng);
          break;
        case InitialPair::Kind::aligned:
          w = MatrixXcd::Identity(n, config.rank_p());
          vq = MatrixXcd::Identity(n, config.rank_q());
          break;
        case InitialPair::Kind::explicit_pair:
          w = range_basis(initial.p);
          vq = range_basis(initial.q);
          if (w.cols() < 1 || w.cols() > n - 1 || vq.cols() < 1 || vq.cols() > n - 1)
            throw std::invalid_argument("explicit projections must have ranks in [1, n - 1]");
          break;
      }
      MatrixXcd g(n, n), term, scratch;
      long done = 0;
      double worst = 0.0;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        for (; done < steps[i]; ++done) {
          sample_gue(g, rng);
          exponential_step(g, s, w, term, scratch);
          worst = std::max(worst, reorthonormalize(w));
        }
        const std::vector<double> values = compression_spectrum(vq, w, n);
        std::copy(values.begin(), values.end(),
                  result.snapshots[i].eigenvalues.begin() + static_cast<std::ptrdiff_t>(r * n));
      }
      drift[static_cast<std::size_t>(r)] = worst;
    }
  });
  result.unitarity_drift = *std::max_element(drift.begin(), drift.end());
  return result;
}

double ks_distance(const std::vector<double>& sample, const IntervalMeasure& nu) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> x = sample;
  std::sort(x.begin(), x.end());
  const double total = static_cast<double>(x.size());
  const double mass = nu.total_mass();
  double worst = 0.0;
  auto check = [&](double e, double f) { worst = std::max(worst, std::abs(e - f)); };
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    check(static_cast<double>(i) / total, nu.cdf(x[i], true) / mass);
    check(static_cast<double>(j) / total, nu.cdf(x[i]) / mass);
    i = j;
  }
  // Jumps of nu at the ends that the sample may miss.
  auto below = [&](double v, bool strict) {
    return static_cast<double>(strict ? std::lower_bound(x.begin(), x.end(), v) - x.begin()
                                      : std::upper_bound(x.begin(), x.end(), v) - x.begin());
  };
  for (double v : {0.0, 1.0}) {
    check(below(v, true) / total, nu.cdf(v, true) / mass);
    check(below(v, false) / total, nu.cdf(v) / mass);
  }
  return worst;
}

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < x.size() || j < y.size()) {
    const double v = j == y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return worst;
}

std::vector<double> compare_to_flow(const std::vector<SpectrumSnapshot>& empirical,
                                    const std::vector<TimedLaw>& analytic) {
  bool match = empirical.size() == analytic.size();
  for (std::size_t i = 0; match && i < empirical.size(); ++i)
    match = std::abs(empirical[i].t - analytic[i].t) <= 1e-12;
  if (!match) {
    std::ostringstream ctx;
    ctx << "{\"empirical\":" << empirical.size() << ",\"analytic\":" << analytic.size() << "}";
    throw Error(ErrorCode::TimeGridMismatch, "empirical and analytic time grids differ", ctx.str());
  }
  std::vector<double> out;
  out.reserve(empirical.size());
  for (std::size_t i = 0; i < empirical.size(); ++i) out.push_back(ks_distance(empirical[i].eigenvalues, analytic[i].nu));
  return out;
}

IntervalMeasure flow_law(const CircleMeasure& mu0, const TraceParams& params, double t) {
  if (t == 0.0) return from_circle(mu0, params);
  return from_circle(evolve(mu0, params, t).measure, params);
}

void write_snapshots_csv(std::ostream& out, const std::vector<SpectrumSnapshot>& snapshots) {
  const auto old = out.precision(17);
  out << "t,eigenvalue_index,value\n";
  for (const SpectrumSnapshot& s : snapshots)
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) out << s.t << ',' << i << ',' << s.eigenvalues[i] << '\n';
  out.precision(old);
}

}  // namespace liblab
