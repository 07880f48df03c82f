#ifndef LIBLAB_MEASURES_HPP
#define LIBLAB_MEASURES_HPP

#include <Eigen/Core>

#include <cmath>
#include <utility>

#include "liblab/grid.hpp"

namespace liblab {

using Eigen::ArrayXd;
using Eigen::Index;

/// Traces of the two projections. `a()` and `b()` are always derived from the
/// traces; nothing else is stored.
class TraceParams {
 public:
  TraceParams(double tau_p, double tau_q);
  static TraceParams half() { return {0.5, 0.5}; }

  double tau_p() const { return tau_p_; }
  double tau_q() const { return tau_q_; }
  double a() const;
  double b() const;

  /// Weight of nu at x = 0 forced by the traces, 1 - min(tau_P, tau_Q).
  double forced_atom0() const;
  /// Weight of nu at x = 1 forced by the traces, max(tau_P + tau_Q - 1, 0).
  double forced_atom1() const;
  /// Mass of mu in generic position, (1 - a - b) / 2.
  double interior_mass() const;

  bool half_trace() const { return a() == 0.0 && b() == 0.0; }

  friend bool operator==(const TraceParams&, const TraceParams&) = default;

 private:
  double tau_p_;
  double tau_q_;
};

/// Symmetric measure on (-pi, pi]: exact atoms at theta = 0 and theta = pi
/// plus a density w.r.t. dtheta sampled on the midpoint grid (see grid.hpp).
/// The density is made exactly even on construction.
class CircleMeasure {
 public:
  CircleMeasure() = default;
  explicit CircleMeasure(ArrayXd density, double atom_zero = 0.0, double atom_pi = 0.0);

  static CircleMeasure zero(Index grid_size = grid::kDefaultSize);
  static CircleMeasure atoms(double atom_zero, double atom_pi,
                             Index grid_size = grid::kDefaultSize);

  const ArrayXd& density() const { return density_; }
  double atom_zero() const { return atom_zero_; }
  double atom_pi() const { return atom_pi_; }
  Index grid_size() const { return density_.size(); }

  bool has_atoms() const { return atom_zero_ > 0.0 || atom_pi_ > 0.0; }
  double density_mass() const { return grid::integrate(density_); }
  double total_mass() const { return density_mass() + atom_zero_ + atom_pi_; }

 private:
  ArrayXd density_;
  double atom_zero_ = 0.0;
  double atom_pi_ = 0.0;
};

/// Measure on [0, 1]: atoms at 0 and 1 plus a density w.r.t. dx sampled at
/// x_k = cos^2(theta_k / 2), theta_k = pi (k + 1/2) / M. The nodes are the
/// upper half of the circle grid of size 2M, so x decreases with k.
class IntervalMeasure {
 public:
  IntervalMeasure() = default;
  IntervalMeasure(ArrayXd density, double atom0, double atom1);

  const ArrayXd& density() const { return density_; }
  double atom0() const { return atom0_; }
  double atom1() const { return atom1_; }
  Index grid_size() const { return density_.size(); }

  static double node_angle(Index k, Index m);
  static ArrayXd nodes(Index m);

  double density_mass() const;
  double total_mass() const { return density_mass() + atom0_ + atom1_; }

  /// nu([0, x]) with atoms counted as jumps; `left` gives nu([0, x)).
  double cdf(double x, bool left = false) const;

 private:
  ArrayXd density_;
  double atom0_ = 0.0;
  double atom1_ = 0.0;
};

struct Decomposition {
  IntervalMeasure mu;
  bool generic_position = false;
};

/// Removes the trace-forced atoms from nu. Throws NegativeMass when nu's atoms
/// cannot cover them.
Decomposition decompose(const IntervalMeasure& nu, const TraceParams& params);

/// mu on [0, 1] to the symmetrized circle measure. Atoms of mu at x = 1 and
/// x = 0 become atoms at theta = 0 and theta = pi with the same weight.
CircleMeasure to_circle(const IntervalMeasure& mu);

/// Inverse of to_circle followed by re-inserting the forced atoms.
IntervalMeasure from_circle(const CircleMeasure& hat_mu, const TraceParams& params);

/// Interior part of the free-pair law, sqrt((beta-x)(x-alpha)) / (2 pi x(1-x)).
double free_pair_density(double x, const TraceParams& params);

/// mu-hat of a freely independent pair with the given traces, as cell averages.
CircleMeasure free_pair_measure(const TraceParams& params,
                                Index grid_size = grid::kDefaultSize);

/// Samples an interval density h(x) (w.r.t. dx) onto the circle grid.
template <typename Density>
CircleMeasure circle_from_interval_density(Density&& h, Index grid_size = grid::kDefaultSize) {
  const Index m = grid_size / 2;
  ArrayXd values(m);
  for (Index k = 0; k < m; ++k) {
    const double theta = IntervalMeasure::node_angle(k, m);
    const double c = std::cos(0.5 * theta);
    values(k) = h(c * c);
  }
  return to_circle(IntervalMeasure(std::move(values), 0.0, 0.0));
}

}  // namespace liblab

#endif  // LIBLAB_MEASURES_HPP
