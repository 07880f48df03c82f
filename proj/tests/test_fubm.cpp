#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "liblab/fubm.hpp"
#include "liblab/loewner.hpp"
#include "oracles.hpp"

using namespace liblab;

namespace {

CircleMeasure cosine_start(Index n = 4096) {
  const ArrayXd th = grid::angles(n);
  return CircleMeasure((1.0 + th.cos()) / (4.0 * oracle::pi));
}

// Closed forms of the first three moments from the delta start, obtained by
// solving the triangular system by hand.
double c1(double t) { return std::exp(-0.5 * t); }
double c2(double t) { return std::exp(-t) * (1.0 - t); }
double c3(double t) { return std::exp(-1.5 * t) * (1.0 - 3.0 * t + 1.5 * t * t); }

}  // namespace

TEST_CASE("delta start closed forms") {
  for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const MomentVector m = moment_flow(delta_moments(), t);
    CHECK(m.t == t);
    CHECK(std::abs(m.c(0) - 1.0) == 0.0);
    CHECK(std::abs(m.c(1) - c1(t)) < 1e-12);
    CHECK(std::abs(m.c(2) - c2(t)) < 1e-8);
    CHECK(std::abs(m.c(3) - c3(t)) < 1e-8);
    CHECK((m.c.abs() <= 1.0 + 1e-12).all());
  }
}

TEST_CASE("haar is a fixed point") {
  MomentVector haar{0.0, ArrayXd::Zero(33)};
  haar.c(0) = 1.0;
  const MomentVector m = moment_flow(haar, 1.5);
  CHECK(m.c.tail(32).abs().maxCoeff() == 0.0);
}

TEST_CASE("triangularity and contraction") {
  MomentVector a = moments_of(cosine_start());
  MomentVector b = a;
  b.c(7) += 0.3;
  const MomentVector fa = moment_flow(a, 0.8), fb = moment_flow(b, 0.8);
  for (Index n = 1; n < 7; ++n) CHECK(fa.c(n) == fb.c(n));
  CHECK(fa.c(7) != fb.c(7));
  CHECK(std::abs(fa.c(1) - a.c(1) * std::exp(-0.4)) < 1e-13);
}

TEST_CASE("moments of simple measures") {
  const MomentVector haar = moments_of(CircleMeasure(ArrayXd::Constant(4096, 0.25 / oracle::pi)));
  CHECK(haar.c(0) == doctest::Approx(1.0));
  CHECK(haar.c.tail(32).abs().maxCoeff() < 1e-14);
  const MomentVector delta = moments_of(CircleMeasure::atoms(0.5, 0.0, 4096));
  CHECK((delta.c - 1.0).abs().maxCoeff() < 1e-15);
  const MomentVector pi_atom = moments_of(CircleMeasure::atoms(0.0, 0.5, 4096));
  CHECK(pi_atom.c(3) == doctest::Approx(-1.0));
  const MomentVector cosine = moments_of(cosine_start());
  CHECK(cosine.c(1) == doctest::Approx(0.5));
  CHECK(std::abs(cosine.c(2)) < 1e-14);
}

TEST_CASE("field coefficients") {
  const HerglotzField field(cosine_start(), TraceParams::half());
  const MomentVector m = moments_of_field(field);
  const MomentVector direct = moments_of(cosine_start());
  CHECK((m.c - direct.c).abs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruction round trip") {
  // Full support: the summed series stays positive and nothing is clipped.
  for (const CircleMeasure& mu : {evolve_half_trace(CircleMeasure::atoms(0.5, 0.0), 2.5).measure,
                                  evolve_half_trace(cosine_start(), 0.5).measure}) {
    const MomentVector m = moments_of(mu);
    const CircleMeasure back = measure_from_moments(m);
    CHECK(back.total_mass() == doctest::Approx(0.5 * m.c(0)).epsilon(1e-12));
    const MomentVector again = moments_of(back);
    CHECK((again.c.head(17) - m.c.head(17)).abs().maxCoeff() < 1e-4);
  }
  // Support on an arc: clipping keeps the result a measure.
  const CircleMeasure arc = measure_from_moments(moments_of(evolve_half_trace(CircleMeasure::atoms(0.5, 0.0), 0.5).measure));
  CHECK(arc.density().minCoeff() >= 0.0);
  CHECK(arc.total_mass() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("loewner flow against the recursion") {
  // Loewner time s matches recursion time 2 s.
  for (const CircleMeasure& mu : {CircleMeasure::atoms(0.5, 0.0), cosine_start()}) {
    const MomentVector c0 = moments_of(mu);
    for (double s : {0.125, 0.25, 0.5, 1.0}) {
      const MomentVector expected = moment_flow(c0, 2.0 * s);
      const FlowState state = evolve_half_trace(mu, s);
      const MomentVector boundary = moments_of(state.measure);
      CHECK((boundary.c.segment(1, 10) - expected.c.segment(1, 10)).abs().maxCoeff() < 1e-5);
      const HalfTraceFlow flow(HerglotzField(mu, TraceParams::half()), s);
      const MomentVector field = moments_of_field(flow);
      CHECK((field.c.segment(1, 10) - expected.c.segment(1, 10)).abs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("first moment rate along the loewner flow") {
  const HerglotzField field(cosine_start(), TraceParams::half());
  const double s = 0.6, h = 1e-3;
  auto first = [&](double t) { return moments_of_field(HalfTraceFlow(field, t), 4).c(1); };
  const double rate = (first(s + h) - first(s - h)) / (2.0 * h);
  // d/ds c_1 = -c_1 in Loewner time.
  CHECK(std::abs(rate + first(s)) < 1e-6);
}
