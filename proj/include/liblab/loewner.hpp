#ifndef LIBLAB_LOEWNER_HPP
#define LIBLAB_LOEWNER_HPP

#include <atomic>
#include <mutex>
#include <utility>
#include <vector>

#include "liblab/transforms.hpp"

namespace liblab {

struct FlowDiagnostics {
  long branch_ambiguities = 0;
  /// Trial seeds whose characteristic left the disk before time t.
  long characteristic_drops = 0;
  /// Angle or radius bisections taken by the continuation.
  long continuation_refinements = 0;
  /// Some continuation step hit the depth bound of 12 bisections.
  bool refinement_truncated = false;

  FlowDiagnostics& operator+=(const FlowDiagnostics& other);
};

/// Solution of one inverse problem on the ring: `target` is the point where
/// L(t, .) is wanted, `preimage` is f_t(target) (half trace) or the seed of
/// the characteristic ending at target (general).
struct Characteristic {
  cd preimage;
  cd target;
  cd value;  // L(t, target)
  cd state;  // quantity carried by the continuation (preimage or conserved H)
};

/// Shared machinery of the two evolved fields: root solves along arcs with
/// radial start-up and angular continuation, plus counters.
class EvolvedField : public HerglotzFunction {
 public:
  EvolvedField(HerglotzField initial, double t);

  double time() const { return t_; }
  const HerglotzField& initial() const { return initial_; }
  const TraceParams& params() const override { return initial_.params(); }

  cd L(cd zeta) const override;
  ArrayXcd L_on_arc(double radius, const ArrayXd& angles) const override;

  /// Solves for the point over `target`, continuing from 0 along a ray.
  Characteristic solve(cd target) const;
  /// One root solve from a guess of the continued state; throws on failure.
  virtual Characteristic solve_from(cd target, cd guess) const = 0;

  FlowDiagnostics diagnostics() const;
  /// Solutions recorded by L_on_arc calls (preimage, target).
  std::vector<std::pair<cd, cd>> recorded() const;

 protected:
  /// Continued state for a target close to the origin.
  virtual cd origin_guess(cd target) const = 0;
  /// Predicted state at `to` from the solution at `from`.
  virtual cd predict(const Characteristic& from, cd to) const = 0;

  HerglotzField initial_;
  double t_;
  mutable std::atomic<long> ambiguities_{0};
  mutable std::atomic<long> drops_{0};

 private:
  Characteristic continue_to(const Characteristic& from, double r0, double th0, double r1,
                             double th1, int depth) const;
  Characteristic radial(double radius, double theta) const;

  mutable std::atomic<long> refinements_{0};
  mutable std::atomic<bool> truncated_{false};
  mutable std::mutex record_guard_;
  mutable std::vector<std::pair<cd, cd>> record_;
};

/// a = b = 0: L(t, zeta) = L(0, f_t(zeta)) with f_t the inverse of
/// g_t(w) = w exp(2t L(0, w)).
class HalfTraceFlow final : public EvolvedField {
 public:
  HalfTraceFlow(HerglotzField initial, double t);

  cd g(cd w) const;
  Characteristic solve_from(cd target, cd guess) const override;

 protected:
  cd origin_guess(cd target) const override;
  cd predict(const Characteristic& from, cd to) const override;
};

struct CharacteristicOptions {
  double initial_step = 1e-3;
  double max_step = 0.25;
  double local_tolerance = 1e-10;
};

/// General traces. Along a characteristic of the radial Loewner equation
/// H is conserved, H(t, g_t(zeta)) = H(0, zeta) =: c, and log g obeys the
/// autonomous ODE lambda' = sqrt(A(e^lambda)^2 + 4c). L(t, w) is found by
/// integrating backwards from w for a trial c and solving c = H(0, seed(c)).
class GeneralFlow final : public EvolvedField {
 public:
  GeneralFlow(HerglotzField initial, double t, CharacteristicOptions options = {});

  struct Path {
    cd log_end;    // log g at the far end of the integration
    cd sensitivity;  // derivative of log_end w.r.t. the start point or c
    int steps = 0;
  };
  /// Forward characteristic from a seed up to time t; throws CharacteristicExit.
  Path shoot(cd seed) const;
  /// Backward characteristic from the target with conserved value c; the
  /// sensitivity is d log(seed) / dc.
  Path trace_back(cd target, cd c) const;

  Characteristic solve_from(cd target, cd guess) const override;

 protected:
  cd origin_guess(cd target) const override;
  cd predict(const Characteristic& from, cd to) const override;

 private:
  Path integrate(cd lambda, cd sensitivity, cd c, cd dc, double duration) const;

  CharacteristicOptions options_;
};

/// f_t(zeta) for a = b = 0, seeded with e^{-t} zeta. Throws NewtonDivergence
/// or ExitedDisk.
cd subordinate_f(const HerglotzField& initial, double t, cd zeta);

struct EvolveOptions {
  Index grid_size = 0;  // 0: that of the initial measure
  BoundaryLadder ladder{};
  CharacteristicOptions characteristics{};
};

struct FlowState {
  double t = 0.0;
  CircleMeasure measure;
  TraceParams params = TraceParams::half();
  /// Characteristic endpoints used for the boundary recovery (preimage, g_t(preimage)).
  std::vector<std::pair<cd, cd>> char_cache;
  FlowDiagnostics diagnostics;
};

FlowState evolve_half_trace(const CircleMeasure& mu0, double t, const EvolveOptions& options = {});
FlowState evolve_general(const CircleMeasure& mu0, const TraceParams& params, double t,
                         const EvolveOptions& options = {});
/// evolve_half_trace when a = b = 0, evolve_general otherwise.
FlowState evolve(const CircleMeasure& mu0, const TraceParams& params, double t,
                 const EvolveOptions& options = {});

}  // namespace liblab

#endif  // LIBLAB_LOEWNER_HPP
