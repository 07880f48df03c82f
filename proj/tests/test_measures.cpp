#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "liblab/error.hpp"
#include "liblab/measures.hpp"
#include "oracles.hpp"

using namespace liblab;

namespace {

IntervalMeasure arcsine_half(Index m = 2048) {
  const ArrayXd x = IntervalMeasure::nodes(m);
  ArrayXd h = 0.5 / (oracle::pi * (x * (1.0 - x)).sqrt());
  return IntervalMeasure(h, 0.5, 0.0);
}

}  // namespace

TEST_CASE("trace parameters") {
  const TraceParams p(0.5, 0.6);
  CHECK(p.a() == doctest::Approx(0.1));
  CHECK(p.b() == doctest::Approx(0.1));
  CHECK(p.forced_atom0() == doctest::Approx(0.5));
  CHECK(p.forced_atom1() == doctest::Approx(0.1));
  CHECK(p.interior_mass() == doctest::Approx(0.4));
  CHECK(TraceParams::half().half_trace());
  CHECK_THROWS_AS(TraceParams(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(TraceParams(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("grid symmetry and quadrature") {
  const Index n = 64;
  for (Index k = 0; k < n; ++k) {
    CHECK(grid::angle(grid::mirror(k, n), n) == doctest::Approx(-grid::angle(k, n)).epsilon(1e-15));
    CHECK(grid::angle(k, n) != 0.0);
  }
  const ArrayXd th = grid::angles(n);
  CHECK(grid::integrate((1.0 + th.cos()) / (2.0 * grid::kPi)) == doctest::Approx(1.0).epsilon(1e-14));
  const ArrayXd m = grid::cosine_moments((1.0 + th.cos()) / (4.0 * grid::kPi));
  CHECK(m(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m(1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(m(2)) < 1e-15);
  const ArrayXd back = grid::synthesize_cosine(m, n);
  CHECK(((back - (1.0 + th.cos()) / (4.0 * grid::kPi)).abs().maxCoeff()) < 1e-15);
}

TEST_CASE("circle measure is even by construction") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ArrayXd d(128);
  for (auto& v : d) v = u(rng);
  const CircleMeasure mu(d, 0.1, 0.2);
  for (Index k = 0; k < 128; ++k) CHECK(mu.density()(k) == mu.density()(grid::mirror(k, 128)));
  CHECK(mu.total_mass() == doctest::Approx(mu.density_mass() + 0.3));
  CHECK_THROWS_AS(CircleMeasure(ArrayXd::Ones(100)), std::invalid_argument);
  CHECK_THROWS_AS(CircleMeasure(-ArrayXd::Ones(64)), std::invalid_argument);
}

TEST_CASE("decompose") {
  const TraceParams half = TraceParams::half();
  SUBCASE("free projections at one half") {
    const IntervalMeasure nu = arcsine_half();
    CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-6));
    const Decomposition d = decompose(nu, half);
    CHECK(d.generic_position);
    CHECK(d.mu.atom0() == 0.0);
    CHECK(d.mu.atom1() == 0.0);
    CHECK(d.mu.density_mass() == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("equal projections keep an atom at one") {
    const IntervalMeasure nu(ArrayXd::Zero(256), 0.5, 0.5);
    const Decomposition d = decompose(nu, half);
    CHECK_FALSE(d.generic_position);
    CHECK(d.mu.density_mass() == 0.0);
    CHECK(d.mu.atom1() == doctest::Approx(0.5));
  }
  SUBCASE("atoms too small") {
    const IntervalMeasure nu(ArrayXd::Zero(256), 0.3, 0.7);
    try {
      decompose(nu, half);
      FAIL("expected NegativeMass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NegativeMass);
      CHECK(e.context().find("atom0") != std::string::npos);
    }
  }
  SUBCASE("not a probability measure") {
    CHECK_THROWS_AS(decompose(IntervalMeasure(ArrayXd::Zero(8), 0.5, 0.0), half),
                    std::invalid_argument);
  }
}

TEST_CASE("to_circle of the free law at one half is uniform") {
  const Decomposition d = decompose(arcsine_half(), TraceParams::half());
  const CircleMeasure hat = to_circle(d.mu);
  CHECK(hat.grid_size() == 4096);
  // x(1 - x) from cos^2 loses digits near the endpoints, hence 1e-9 relative.
  CHECK(((hat.density() - 1.0 / (4.0 * oracle::pi)).abs() * 4.0 * oracle::pi).maxCoeff() < 1e-9);
  CHECK(hat.total_mass() == doctest::Approx(d.mu.total_mass()).epsilon(1e-10));

  const CircleMeasure zero = to_circle(IntervalMeasure(ArrayXd::Zero(64), 0.0, 0.0));
  CHECK(zero.density().abs().maxCoeff() == 0.0);
}

TEST_CASE("to_circle pushforward against direct quadrature") {
  // Smooth bump on [0.2, 0.8]; mass computed in x by Gauss-Legendre.
  auto h = [](double x) {
    if (x <= 0.2 || x >= 0.8) return 0.0;
    return std::pow((x - 0.2) * (0.8 - x), 3);
  };
  const double mass_x = oracle::gauss(h, 0.2, 0.8, 16, 20);
  const CircleMeasure hat = circle_from_interval_density(h, 4096);
  CHECK(hat.total_mass() == doctest::Approx(mass_x).epsilon(1e-10));
  CHECK(IntervalMeasure(IntervalMeasure::nodes(2048).unaryExpr(h), 0, 0).density_mass() ==
        doctest::Approx(mass_x).epsilon(1e-10));
}

TEST_CASE("spike at x = 1/2 maps to symmetric spikes") {
  ArrayXd h = ArrayXd::Zero(512);
  h(255) = 1.0;
  h(256) = 1.0;
  const IntervalMeasure mu(h, 0.0, 0.0);
  const CircleMeasure hat = to_circle(mu);
  CHECK(hat.total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
  Index peak;
  hat.density().maxCoeff(&peak);
  CHECK(std::abs(std::abs(grid::angle(peak, 1024)) - oracle::pi / 2) < 2.0 * grid::spacing(1024));
}

TEST_CASE("from_circle inverts to_circle") {
  SUBCASE("uniform circle density gives the free law") {
    const CircleMeasure hat(ArrayXd::Constant(4096, 1.0 / (4.0 * oracle::pi)));
    const IntervalMeasure nu = from_circle(hat, TraceParams::half());
    CHECK(nu.atom0() == doctest::Approx(0.5));
    CHECK(nu.atom1() == 0.0);
    const ArrayXd x = IntervalMeasure::nodes(2048);
    const ArrayXd expected = 1.0 / (2.0 * oracle::pi * (x * (1.0 - x)).sqrt());
    CHECK(((nu.density() - expected).abs() / expected).maxCoeff() < 1e-9);
    CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("atoms only") {
    const IntervalMeasure nu = from_circle(CircleMeasure::atoms(0.2, 0.1, 64), TraceParams(0.5, 0.6));
    CHECK(nu.density_mass() == 0.0);
    CHECK(nu.atom0() == doctest::Approx(0.6));
    CHECK(nu.atom1() == doctest::Approx(0.3));
  }
  SUBCASE("random round trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    ArrayXd d(2048);
    for (auto& v : d) v = u(rng);
    const CircleMeasure hat(d);
    const CircleMeasure back = to_circle(from_circle(hat, TraceParams(0.3, 0.4)));
    CHECK((back.density() - hat.density()).abs().maxCoeff() < 1e-10);
    CHECK(back.density_mass() == doctest::Approx(hat.density_mass()).epsilon(1e-10));
  }
}

TEST_CASE("decompose and back reconstructs nu") {
  const TraceParams p(0.5, 0.6);
  const CircleMeasure free = free_pair_measure(p);
  CHECK(std::abs(free.total_mass() - p.interior_mass()) < 1e-12);
  const CircleMeasure half = free_pair_measure(TraceParams::half());
  CHECK((half.density() - 0.25 / oracle::pi).abs().maxCoeff() < 1e-12);
  const IntervalMeasure nu = from_circle(free, p);
  const IntervalMeasure normalized(nu.density() / nu.density_mass() * p.interior_mass(), nu.atom0(),
                                   nu.atom1());
  const Decomposition d = decompose(normalized, p);
  CHECK(d.generic_position);
  const IntervalMeasure again = from_circle(to_circle(d.mu), p);
  CHECK((again.density() - normalized.density()).abs().maxCoeff() < 1e-9);
  CHECK(again.atom0() == doctest::Approx(normalized.atom0()).epsilon(1e-12));
  CHECK(again.atom1() == doctest::Approx(normalized.atom1()).epsilon(1e-12));
}

TEST_CASE("interval cdf") {
  const IntervalMeasure nu = arcsine_half();
  CHECK(nu.cdf(-0.1) == 0.0);
  CHECK(nu.cdf(0.0, true) == 0.0);
  CHECK(nu.cdf(0.0) == doctest::Approx(0.5));
  // Arcsine CDF: (2/pi) asin(sqrt(x)), halved.
  for (double x : {0.1, 0.25, 0.5, 0.9}) {
    CHECK(nu.cdf(x) == doctest::Approx(0.5 + std::asin(std::sqrt(x)) / oracle::pi).epsilon(1e-4));
  }
  CHECK(nu.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-6));
}
