#include "liblab/loewner.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "liblab/error.hpp"
#include "liblab/parallel.hpp"

namespace liblab {

namespace {

constexpr int kMaxNewton = 100;
constexpr int kMaxDepth = 12;
constexpr double kRadialStart = 0.05;
constexpr double kRadialStep = 0.05;

cd wrap_imag(cd value) {
  const double turn = 2.0 * grid::kPi;
  return {value.real(), value.imag() - turn * std::round(value.imag() / turn)};
}

std::string point_context(cd target, double t) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"zeta_re\":" << target.real() << ",\"zeta_im\":" << target.imag() << ",\"t\":" << t
      << "}";
  return out.str();
}

}  // namespace

FlowDiagnostics& FlowDiagnostics::operator+=(const FlowDiagnostics& other) {
  branch_ambiguities += other.branch_ambiguities;
  characteristic_drops += other.characteristic_drops;
  continuation_refinements += other.continuation_refinements;
  refinement_truncated = refinement_truncated || other.refinement_truncated;
  return *this;
}

// ---------------------------------------------------------------------------

EvolvedField::EvolvedField(HerglotzField initial, double t) : initial_(std::move(initial)), t_(t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("flow time must be positive");
}

cd EvolvedField::L(cd zeta) const { return solve(zeta).value; }

Characteristic EvolvedField::solve(cd target) const {
  if (target == 0.0) return solve_from(target, origin_guess(target));
  return radial(std::abs(target), std::arg(target));
}

Characteristic EvolvedField::radial(double radius, double theta) const {
  const double start = std::min(radius, kRadialStart);
  const cd first = std::polar(start, theta);
  Characteristic c = solve_from(first, origin_guess(first));
  double r = start;
  while (r < radius) {
    const double next = std::min(radius, r + kRadialStep);
    c = continue_to(c, r, theta, next, theta, 0);
    r = next;
  }
  return c;
}

Characteristic EvolvedField::continue_to(const Characteristic& from, double r0, double th0,
                                         double r1, double th1, int depth) const {
  const cd to = std::polar(r1, th1);
  try {
    return solve_from(to, predict(from, to));
  } catch (const Error&) {
    if (depth >= kMaxDepth) {
      truncated_ = true;
      throw;
    }
    ++refinements_;
    const double rm = 0.5 * (r0 + r1);
    const double tm = 0.5 * (th0 + th1);
    const Characteristic mid = continue_to(from, r0, th0, rm, tm, depth + 1);
    return continue_to(mid, rm, tm, r1, th1, depth + 1);
  }
}

ArrayXcd EvolvedField::L_on_arc(double radius, const ArrayXd& angles) const {
  ArrayXcd out(angles.size());
  std::vector<std::pair<cd, cd>> found(static_cast<std::size_t>(angles.size()));
  parallel_chunks(0, angles.size(), [&](long lo, long hi) {
    Characteristic c = radial(radius, angles(lo));
    out(lo) = c.value;
    found[lo] = {c.preimage, c.target};
    for (long j = lo + 1; j < hi; ++j) {
      c = continue_to(c, radius, angles(j - 1), radius, angles(j), 0);
      out(j) = c.value;
      found[j] = {c.preimage, c.target};
    }
  });
  std::lock_guard lock(record_guard_);
  record_.insert(record_.end(), found.begin(), found.end());
  return out;
}

FlowDiagnostics EvolvedField::diagnostics() const {
  FlowDiagnostics d;
  d.branch_ambiguities = ambiguities_;
  d.characteristic_drops = drops_;
  d.continuation_refinements = refinements_;
  d.refinement_truncated = truncated_;
  return d;
}

std::vector<std::pair<cd, cd>> EvolvedField::recorded() const {
  std::lock_guard lock(record_guard_);
  return record_;
}

// ---------------------------------------------------------------------------

HalfTraceFlow::HalfTraceFlow(HerglotzField initial, double t) : EvolvedField(std::move(initial), t) {
  if (!params().half_trace()) {
    throw std::invalid_argument("the closed-form subordination needs tau_P = tau_Q = 1/2");
  }
}

cd HalfTraceFlow::g(cd w) const { return w * std::exp(2.0 * t_ * initial_.L(w)); }

cd HalfTraceFlow::origin_guess(cd target) const {
  return std::exp(-2.0 * t_ * initial_.L(0.0)) * target;
}

cd HalfTraceFlow::predict(const Characteristic& from, cd to) const {
  return from.preimage * (to / from.target);
}

Characteristic HalfTraceFlow::solve_from(cd target, cd guess) const {
  if (target == 0.0) return {0.0, 0.0, initial_.L(0.0), 0.0};
  const cd log_target = std::log(target);
  cd w = guess;
  for (int it = 0; it < kMaxNewton; ++it) {
    // log w - log zeta + 2t L(0, w) = 0 modulo 2 pi i.
    const cd lw = initial_.L(w);
    const cd residual = wrap_imag(std::log(w) - log_target + 2.0 * t_ * lw);
    // Roundoff in the residual grows with 2 t |L|.
    const double floor = 1e-15 * (1.0 + 2.0 * t_ * std::abs(lw));
    const cd slope = 1.0 / w + 2.0 * t_ * initial_.dL(w);
    cd step = -residual / slope;
    int damp = 0;
    while (std::abs(w + step) >= 1.0) {
      if (++damp > 40) {
        throw Error(ErrorCode::ExitedDisk, "Newton iterate left the disk", point_context(target, t_));
      }
      step *= 0.5;
    }
    w += step;
    if (std::abs(step) <= 4.0 * floor * std::abs(w) || std::abs(residual) < floor) {
      if (std::abs(g(w) - target) >= 1e-11) break;
      return {w, target, initial_.L(w), w};
    }
  }
  throw Error(ErrorCode::NewtonDivergence, "subordination Newton did not converge",
              point_context(target, t_));
}

// ---------------------------------------------------------------------------

GeneralFlow::GeneralFlow(HerglotzField initial, double t, CharacteristicOptions options)
    : EvolvedField(std::move(initial), t), options_(options) {}

cd GeneralFlow::origin_guess(cd) const { return initial_.H(0.0); }

cd GeneralFlow::predict(const Characteristic& from, cd) const { return from.state; }

GeneralFlow::Path GeneralFlow::integrate(cd lambda, cd sensitivity, cd c, cd dc,
                                         double duration) const {
  const TraceParams& p = params();
  struct State {
    cd lambda;
    cd sensitivity;
  };
  cd carried = recover_L_from_H(c, std::exp(lambda), p);
  // lambda' = sqrt(A^2 + 4c) = 2L + A; the sensitivity obeys the variational
  // equation with forcing (2 / S) dc.
  auto rhs = [&](const State& s) -> State {
    const cd g = std::exp(s.lambda);
    const cd a = trace_term(g, p);
    const cd speed = 2.0 * recover_L_from_H(c, g, p, carried) + a;
    const cd da = trace_term_derivative(g, p);
    return {speed, (a * da * g / speed) * s.sensitivity + (2.0 / speed) * dc};
  };
  auto rk4 = [&](const State& s, double h) {
    const State k1 = rhs(s);
    const State k2 = rhs({s.lambda + 0.5 * h * k1.lambda, s.sensitivity + 0.5 * h * k1.sensitivity});
    const State k3 = rhs({s.lambda + 0.5 * h * k2.lambda, s.sensitivity + 0.5 * h * k2.sensitivity});
    const State k4 = rhs({s.lambda + h * k3.lambda, s.sensitivity + h * k3.sensitivity});
    return State{
        s.lambda + h / 6.0 * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda),
        s.sensitivity +
            h / 6.0 * (k1.sensitivity + 2.0 * k2.sensitivity + 2.0 * k3.sensitivity + k4.sensitivity)};
  };

  const double direction = duration < 0.0 ? -1.0 : 1.0;
  const double total = std::abs(duration);
  State y{lambda, sensitivity};
  double done = 0.0;
  double h = options_.initial_step;
  int steps = 0;
  while (done < total) {
    h = std::min(h, total - done);
    const State full = rk4(y, direction * h);
    const State half = rk4(rk4(y, 0.5 * direction * h), 0.5 * direction * h);
    const double err = std::abs(half.lambda - full.lambda);
    if (!std::isfinite(err) || !std::isfinite(std::abs(half.sensitivity))) {
      h *= 0.25;
      if (h < 1e-14) break;
      continue;
    }
    if (err <= options_.local_tolerance || h < 1e-12) {
      y = {half.lambda + (half.lambda - full.lambda) / 15.0,
           half.sensitivity + (half.sensitivity - full.sensitivity) / 15.0};
      done += h;
      ++steps;
      if (direction > 0.0 && y.lambda.real() >= 0.0) break;
      bool ambiguous = false;
      carried = recover_L_from_H(c, std::exp(y.lambda), p, carried, &ambiguous);
      if (ambiguous) ++ambiguities_;
      const double grow = err > 0.0 ? 0.9 * std::pow(options_.local_tolerance / err, 0.2) : 4.0;
      h = std::min(options_.max_step, h * std::clamp(grow, 0.2, 4.0));
    } else {
      h *= std::clamp(0.9 * std::pow(options_.local_tolerance / err, 0.2), 0.1, 0.5);
    }
  }
  if (done < total || (direction > 0.0 && !(y.lambda.real() < 0.0))) {
    if (direction > 0.0) ++drops_;
    std::ostringstream ctx;
    ctx.precision(17);
    ctx << "{\"start_re\":" << std::exp(lambda).real() << ",\"start_im\":" << std::exp(lambda).imag()
        << ",\"t\":" << t_ << ",\"exit_time\":" << done << "}";
    throw Error(ErrorCode::CharacteristicExit, "characteristic reached the unit circle", ctx.str());
  }
  return {y.lambda, y.sensitivity, steps};
}

GeneralFlow::Path GeneralFlow::shoot(cd seed) const {
  const TraceParams& p = params();
  const cd l0 = initial_.L(seed);
  const cd a0 = trace_term(seed, p);
  const cd c = (l0 + a0) * l0;
  const cd dc = (2.0 * l0 + a0) * initial_.dL(seed) + trace_term_derivative(seed, p) * l0;
  return integrate(std::log(seed), 1.0 / seed, c, dc, t_);
}

GeneralFlow::Path GeneralFlow::trace_back(cd target, cd c) const {
  return integrate(std::log(target), 0.0, c, 1.0, -t_);
}

Characteristic GeneralFlow::solve_from(cd target, cd guess) const {
  const TraceParams& p = params();
  if (target == 0.0) {
    const cd c = initial_.H(0.0);
    return {0.0, 0.0, recover_L_from_H(c, 0.0, p), c};
  }
  // Residual c - H(0, seed(c)); its derivative is 1 - H0'(seed) dseed/dc.
  auto residual = [&](cd c, cd& seed, cd& slope) {
    const Path path = trace_back(target, c);
    seed = std::exp(path.log_end);
    const cd l0 = initial_.L(seed);
    const cd a0 = trace_term(seed, p);
    const cd dh = (2.0 * l0 + a0) * initial_.dL(seed) + trace_term_derivative(seed, p) * l0;
    slope = 1.0 - dh * seed * path.sensitivity;
    return c - (l0 + a0) * l0;
  };
  cd c = guess;
  cd seed, slope;
  cd r = residual(c, seed, slope);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxNewton; ++it) {
    const double size = std::abs(r);
    const double scale = std::max(1.0, std::abs(c));
    // The adaptive step sequence makes the map smooth only to about the
    // local tolerance; accept once Newton stalls there.
    if (size < 1e-13 * scale || (size < 1e-9 * scale && size > 0.5 * previous)) {
      return {seed, target, recover_L_from_H(c, target, p), c};
    }
    previous = size;
    cd step = -r / slope;
    for (int damp = 0;; ++damp) {
      cd trial_seed, trial_slope;
      const cd trial = c + step;
      const cd trial_r = residual(trial, trial_seed, trial_slope);
      if (std::abs(trial_r) < size || damp >= 30) {
        c = trial;
        r = trial_r;
        seed = trial_seed;
        slope = trial_slope;
        break;
      }
      step *= 0.5;
    }
  }
  throw Error(ErrorCode::NewtonDivergence, "characteristic Newton did not converge",
              point_context(target, t_));
}

// ---------------------------------------------------------------------------

cd subordinate_f(const HerglotzField& initial, double t, cd zeta) {
  if (t == 0.0) return zeta;
  const HalfTraceFlow flow(initial, t);
  try {
    return flow.solve_from(zeta, std::exp(-t) * zeta).preimage;
  } catch (const Error&) {
    return flow.solve(zeta).preimage;
  }
}

namespace {

FlowState assemble(const EvolvedField& flow, const CircleMeasure& mu0, const EvolveOptions& options) {
  FlowState state;
  state.t = flow.time();
  state.params = flow.params();
  const Index n = options.grid_size > 0 ? options.grid_size : mu0.grid_size();
  state.measure = boundary_density(flow, n, options.ladder);
  state.char_cache = flow.recorded();
  state.diagnostics = flow.diagnostics();
  return state;
}

FlowState identity(const CircleMeasure& mu0, const TraceParams& params) {
  FlowState state;
  state.measure = mu0;
  state.params = params;
  return state;
}

}  // namespace

FlowState evolve_half_trace(const CircleMeasure& mu0, double t, const EvolveOptions& options) {
  if (t == 0.0) return identity(mu0, TraceParams::half());
  const HalfTraceFlow flow(HerglotzField(mu0, TraceParams::half()), t);
  return assemble(flow, mu0, options);
}

FlowState evolve_general(const CircleMeasure& mu0, const TraceParams& params, double t,
                         const EvolveOptions& options) {
  if (t == 0.0) return identity(mu0, params);
  const GeneralFlow flow(HerglotzField(mu0, params), t, options.characteristics);
  return assemble(flow, mu0, options);
}

FlowState evolve(const CircleMeasure& mu0, const TraceParams& params, double t,
                 const EvolveOptions& options) {
  return params.half_trace() ? evolve_half_trace(mu0, t, options)
                             : evolve_general(mu0, params, t, options);
}

}  // namespace liblab
