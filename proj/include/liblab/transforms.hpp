#ifndef LIBLAB_TRANSFORMS_HPP
#define LIBLAB_TRANSFORMS_HPP

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>

#include "liblab/measures.hpp"

namespace liblab {

using cd = std::complex<double>;
using Eigen::ArrayXcd;

// ---------------------------------------------------------------------------
// Szego change of variables z = (2 + zeta + 1/zeta) / 4.

/// The preimage of z in the open unit disk. Throws BranchFailure when z is
/// numerically on the slit [0, 1].
cd szego_to_disk(cd z);
cd disk_to_plane(cd zeta);
/// sqrt(z^2 - z) on the branch that is negative at z = 2, written in zeta.
inline cd szego_root(cd zeta) { return 0.25 * (zeta - 1.0 / zeta); }

/// a (1 - zeta) / (1 + zeta) + b (1 + zeta) / (1 - zeta)
cd trace_term(cd zeta, const TraceParams& params);
cd trace_term_derivative(cd zeta, const TraceParams& params);

// ---------------------------------------------------------------------------
// Herglotz-type functions L(zeta) on the disk.

class HerglotzFunction {
 public:
  virtual ~HerglotzFunction() = default;

  virtual cd L(cd zeta) const = 0;
  virtual const TraceParams& params() const = 0;

  /// L at radius * e^{i theta} for increasing angles in [0, pi]. Evolved
  /// fields override this to continue their root solves along the arc.
  virtual ArrayXcd L_on_arc(double radius, const ArrayXd& angles) const;

  cd H(cd zeta) const;
};

/// Closed-form field of a circle measure: a polynomial for the density part
/// (exact for band-limited grid data) plus the two atom kernels.
class HerglotzField final : public HerglotzFunction {
 public:
  HerglotzField(CircleMeasure measure, TraceParams params);

  cd L(cd zeta) const override;
  cd dL(cd zeta) const;
  /// Moment generating function of 2 mu-hat, L(zeta) - L(0).
  cd psi(cd zeta) const;
  const TraceParams& params() const override { return params_; }

  const CircleMeasure& measure() const { return measure_; }
  /// p_0 = m_0, p_n = 2 m_n; trailing zeros trimmed.
  const Eigen::ArrayXd& coefficients() const { return coefficients_; }
  double total_mass() const { return measure_.total_mass(); }

 private:
  CircleMeasure measure_;
  TraceParams params_;
  Eigen::ArrayXd coefficients_;
};

cd herglotz_L(const CircleMeasure& measure, cd zeta);
cd herglotz_H(const HerglotzFunction& field, cd zeta);

/// Root of L^2 + A L - h = 0 with the principal square root. When the
/// discriminant sits on the negative real axis the root closest to `carried`
/// is returned and `*ambiguous` is set; without a carried value this throws
/// BranchAmbiguity.
cd recover_L_from_H(cd h_value, cd zeta, const TraceParams& params,
                    std::optional<cd> carried = std::nullopt, bool* ambiguous = nullptr);

/// Conjugate function (1/2pi) PV int f(phi) / tan((theta - phi)/2) dphi of
/// grid data; exactly odd when the input is even.
ArrayXd hilbert_transform(const ArrayXd& density);

// ---------------------------------------------------------------------------
// Boundary recovery.

struct BoundaryLadder {
  double eps_coarse = 1e-3;
  double eps_fine = 1e-4;
  /// Ring samples per grid cell; the stored density is the cell average.
  int supersample = 4;
};

struct BoundaryDiagnostics {
  double most_negative = 0.0;  // before clipping
  double mass = 0.0;
};

/// hat h(theta) = lim_{r -> 1} Re L(r e^{i theta}) / 2pi, from the two radii of
/// the ladder and Richardson extrapolation in (1 - r). Each grid value is the
/// average over its cell, which keeps the mass of the Poisson extension exact
/// near sharp edges. Throws DivergenceDetected when Re L grows like 1/(1-r)
/// somewhere.
CircleMeasure boundary_density(const HerglotzFunction& field,
                               Index grid_size = grid::kDefaultSize,
                               const BoundaryLadder& ladder = {},
                               BoundaryDiagnostics* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Cauchy transforms on [0, 1].

cd cauchy_G(const IntervalMeasure& nu, cd z);
/// Cauchy transform of mu (no forced atoms are added).
cd cauchy_F(const IntervalMeasure& mu, cd z);

// ---------------------------------------------------------------------------
// Diagnostics.

struct PdeResidual {
  double max = 0.0;
  double mean = 0.0;
};

using CauchyFlow = std::function<cd(double t, cd z)>;

/// |dG/dt - d/dz[(z^2 - z) G^2 + (2 - tau_P - tau_Q - z) G - (1-tau_P)(1-tau_Q)/z]|
/// by second-order centered differences at every (t, z) of the tensor grid.
PdeResidual pde_residual_G(const CauchyFlow& G, std::span<const double> times,
                           std::span<const cd> points, double dt, double dz,
                           const TraceParams& params);

struct HardyDiagnostic {
  std::array<double, 3> radii{0.9, 0.99, 0.999};
  std::array<double, 3> norms{};
  double sup = 0.0;
  /// Relative change between the last two radii.
  double last_step_change() const { return std::abs(norms[2] - norms[1]) / norms[2]; }
};

/// (int |H(r e^{i theta})|^{3/2} dtheta)^{2/3} for r in {0.9, 0.99, 0.999}.
HardyDiagnostic hardy_norm_diag(const HerglotzFunction& field, Index samples = 8192);

}  // namespace liblab

#endif  // LIBLAB_TRANSFORMS_HPP
