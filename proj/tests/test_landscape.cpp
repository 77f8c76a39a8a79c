#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rfcw/landscape.hpp"
#include "rfcw/model.hpp"

using namespace rfcw;

namespace {

Landscape1D make(int N, double beta, const FieldDistribution& d,
                 std::uint64_t seed = 1) {
  return Landscape1D(SystemParams{N, beta}, sample_field(d, N, seed));
}

Landscape1D zero(int N, double beta) {
  return make(N, beta, FieldDistribution::constant(0.0));
}

// exact Z*Q(m) for h == 0 by binomial enumeration
double binomial_zq(int N, double beta, double m) {
  int k = static_cast<int>(std::lround((m + 1.0) * N / 2.0));
  double lb = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) -
              std::lgamma(N - k + 1.0);
  double mm = (2.0 * k - N) / static_cast<double>(N);
  return std::exp(lb + beta * N * mm * mm / 2.0);
}

}  // namespace

TEST_CASE("log_mgf zero field is ln cosh") {
  auto land = zero(10, 1.7);
  for (double t : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    LogMgf u = land.log_mgf(t);
    CHECK(u.value == doctest::Approx(std::log(std::cosh(t))).epsilon(1e-13));
    CHECK(u.deriv == doctest::Approx(std::tanh(t)).epsilon(1e-13));
  }
}

TEST_CASE("log_mgf at zero and derivative bounds") {
  auto land = make(40, 1.5, FieldDistribution::uniform(-0.4, 0.4), 9);
  LogMgf u0 = land.log_mgf(0.0);
  double direct = 0.0;
  for (double h : land.field().h) direct += std::log(std::cosh(1.5 * h));
  CHECK(u0.value == doctest::Approx(direct / 40.0).epsilon(1e-13));
  for (double t : {-5.0, -0.2, 0.0, 1.4, 8.0}) {
    LogMgf u = land.log_mgf(t);
    CHECK(u.deriv2 > 0.0);
    CHECK(u.deriv2 <= 1.0 + 1e-15);
    CHECK(std::abs(u.deriv) < 1.0);
  }
}

TEST_CASE("log_mgf finite-difference oracle") {
  auto land = make(25, 2.0, FieldDistribution::two_valued(0.2), 4);
  const double d = 1e-5;
  for (double t : {-1.2, 0.0, 0.3, 2.5}) {
    double fd1 = (land.log_mgf(t + d).value - land.log_mgf(t - d).value) /
                 (2.0 * d);
    CHECK(std::abs(land.log_mgf(t).deriv - fd1) < 1e-9);
    double fd2 = (land.log_mgf(t + d).deriv - land.log_mgf(t - d).deriv) /
                 (2.0 * d);
    CHECK(std::abs(land.log_mgf(t).deriv2 - fd2) < 1e-9);
  }
}

TEST_CASE("legendre closed form at zero field") {
  auto land = zero(12, 1.0);
  LegendreResult g0 = land.legendre(0.0);
  CHECK(g0.t_star == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g0.rate == doctest::Approx(0.0).epsilon(1e-12));
  LegendreResult g = land.legendre(0.5);
  double t = std::atanh(0.5);
  CHECK(g.t_star == doctest::Approx(t).epsilon(1e-10));
  CHECK(g.rate ==
        doctest::Approx(0.5 * t - std::log(std::cosh(t))).epsilon(1e-10));
  CHECK(g.rate == doctest::Approx(0.130812).epsilon(1e-4));
}

TEST_CASE("legendre grid-search oracle") {
  auto land = make(30, 1.4, FieldDistribution::uniform(-0.3, 0.3), 11);
  for (double m : {-0.8, -0.15, 0.3, 0.66}) {
    LegendreResult g = land.legendre(m);
    double best = -1e300;
    for (int i = 0; i <= 400000; ++i) {
      double t = -20.0 + i * 1e-4;
      best = std::max(best, t * m - land.log_mgf(t).value);
    }
    CHECK(g.rate == doctest::Approx(best).epsilon(1e-8));
    CHECK(g.deriv2 ==
          doctest::Approx(1.0 / land.log_mgf(g.t_star).deriv2).epsilon(1e-10));
  }
}

TEST_CASE("legendre domain error") {
  auto land = zero(10, 1.0);
  CHECK_THROWS(land.legendre(1.0));
  CHECK_THROWS(land.legendre(-1.2));
}

TEST_CASE("free energy values") {
  auto land = zero(100, 2.0);
  CHECK(land.free_energy(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  double t = std::atanh(0.5);
  double want = -0.125 + (0.5 * t - std::log(std::cosh(t))) / 2.0;
  CHECK(land.free_energy(0.5) == doctest::Approx(want).epsilon(1e-10));
  CHECK(land.free_energy(0.5) == doctest::Approx(-0.059594).epsilon(1e-4));
}

TEST_CASE("Legendre involution on a grid") {
  auto land = make(20, 1.8, FieldDistribution::two_valued(0.15), 6);
  for (double t : {-1.5, -0.4, 0.0, 0.8, 2.0}) {
    double sup = -1e300;
    for (int i = 1; i < 2000; ++i) {
      double m = -1.0 + 2.0 * i / 2000.0;
      sup = std::max(sup, t * m - land.legendre(m).rate);
    }
    CHECK(land.log_mgf(t).value == doctest::Approx(sup).epsilon(1e-6));
  }
}

TEST_CASE("critical points, zero field") {
  auto sub = zero(50, 0.5);
  auto cps = sub.critical_points();
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].is_minimum);
  CHECK(cps[0].m_star == doctest::Approx(0.0).epsilon(1e-12));

  auto sup = zero(50, 2.0);
  auto cps2 = sup.critical_points();
  REQUIRE(cps2.size() == 3);
  CHECK(cps2[0].m_star == doctest::Approx(-cps2[2].m_star).epsilon(1e-10));
  CHECK(std::abs(cps2[2].m_star - 0.9575) < 1e-3);
  CHECK(!cps2[1].is_minimum);
  CHECK(cps2[1].curvature_a == doctest::Approx(-0.5).epsilon(1e-12));
  // alternation and fixed-point residual
  for (const auto& cp : cps2) {
    double rhs = 0.0;
    for (double h : sup.field().h)
      rhs += std::tanh(2.0 * (cp.m_star + h));
    rhs /= 50.0;
    CHECK(std::abs(cp.m_star - rhs) <= 1e-11);
    CHECK(cp.is_minimum == (cp.susceptibility < 1.0));
  }
}

TEST_CASE("critical points, constant field tilts the landscape") {
  auto land = make(60, 2.0, FieldDistribution::constant(0.05));
  auto cps = land.critical_points();
  REQUIRE(cps.size() == 3);
  CHECK(cps[0].is_minimum);
  CHECK(!cps[1].is_minimum);
  CHECK(cps[2].is_minimum);
  // positive well deeper under a positive field
  CHECK(cps[2].F_value < cps[0].F_value);
  // both free-energy forms agree at critical points
  for (const auto& cp : cps)
    CHECK(land.free_energy(cp.m_star) ==
          doctest::Approx(cp.F_value).epsilon(1e-10));
}

TEST_CASE("second-order transition rejected") {
  // beta = 1, h = 0: susceptibility exactly 1 at m = 0
  auto land = zero(30, 1.0);
  CHECK_THROWS_WITH_AS(land.critical_points(),
                       doctest::Contains("second-order"), std::runtime_error);
}

TEST_CASE("gibbs point asymptotics vs exact enumeration") {
  auto land = zero(12, 2.0);
  auto cps = land.critical_points();
  const CriticalPoint& mid = cps[1];
  CHECK(mid.m_star == doctest::Approx(0.0).epsilon(1e-12));
  double predicted = land.gibbs_point_asymptotic(mid, true);
  // counting-measure convention: 2^N times the Gaussian mass sqrt(2/(N pi))
  CHECK(predicted ==
        doctest::Approx(4096.0 * std::sqrt(2.0 / (12.0 * M_PI)))
            .epsilon(1e-10));
  double exact = binomial_zq(12, 2.0, 0.0);
  CHECK(std::abs(predicted / exact - 1.0) < 0.1);
}

TEST_CASE("gaussian shape of Q near a critical point") {
  const int N = 14;
  const double beta = 2.0;
  auto land = zero(N, beta);
  auto cps = land.critical_points();
  const CriticalPoint& mid = cps[1];  // m* = 0
  double a = mid.curvature_a;         // negative at the maximum
  for (int dk = 1; dk * 2.0 / N <= 1.0 / std::sqrt(N) + 1e-12; ++dk) {
    double v = dk * 2.0 / N;
    double ratio = binomial_zq(N, beta, v) / binomial_zq(N, beta, 0.0);
    double predicted = std::exp(-beta * N * a * v * v / 2.0);
    CHECK(std::abs(ratio / predicted - 1.0) < 0.05);
  }
}

TEST_CASE("barrier construction") {
  auto land = make(60, 2.0, FieldDistribution::constant(0.05));
  auto cps = land.critical_points();
  BarrierSpec b = land.barrier(cps[0]);
  REQUIRE(b.deeper.size() == 1);
  CHECK(b.deeper[0].m_star == doctest::Approx(cps[2].m_star));
  CHECK(b.saddle.m_star == doctest::Approx(cps[1].m_star));
  CHECK(b.delta_F ==
        doctest::Approx(land.free_energy(b.saddle.m_star) -
                        land.free_energy(b.start.m_star))
            .epsilon(1e-12));
  CHECK(b.delta_F > 0.0);
}

TEST_CASE("barrier rejects exact ties and global minima") {
  auto land = zero(40, 2.0);
  auto cps = land.critical_points();
  CHECK_THROWS_AS(land.barrier(cps[0]), std::runtime_error);

  auto tilted = make(60, 2.0, FieldDistribution::constant(0.05));
  auto cps2 = tilted.critical_points();
  CHECK_THROWS_AS(tilted.barrier(cps2[2]), std::runtime_error);
}

TEST_CASE("csv emitter") {
  auto land = make(30, 1.6, FieldDistribution::two_valued(0.2), 2);
  std::ostringstream os;
  land.write_csv(os, 21);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "m,F,I,a");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 22);  // inclusive endpoints: grid_points + 1 samples
}
