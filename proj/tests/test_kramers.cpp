#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rfcw/kramers.hpp"
#include "rfcw/landscape.hpp"
#include "rfcw/meso.hpp"
#include "rfcw/model.hpp"
#include "rfcw/potential.hpp"

using namespace rfcw;

namespace {

struct Instance {
  SystemParams params;
  RandomField field;
  Landscape1D land;
  BarrierSpec barrier;

  Instance(int N, double beta, FieldDistribution dist, std::uint64_t seed)
      : params{N, beta},
        field(sample_field(dist, N, seed)),
        land(params, field),
        barrier(land.barrier(pick_start())) {}

  CriticalPoint pick_start() {
    auto cps = land.critical_points();
    const CriticalPoint* best = nullptr;
    for (const auto& cp : cps)
      if (cp.is_minimum && (!best || cp.F_value > best->F_value)) best = &cp;
    return *best;
  }
};

int layer_of(const MesoGrid& grid, std::int64_t idx) {
  int M = 0;
  for (int v : grid.coords(idx)) M += v;
  return M;
}

}  // namespace

TEST_CASE("gamma_bar: zero field closed form") {
  SystemParams p{100, 2.0};
  RandomField f = sample_field(FieldDistribution::constant(0.0), 100, 1);
  Landscape1D land(p, f);
  auto cps = land.critical_points();
  PrefactorSolution sol = gamma_bar(cps[1], f, p, true);
  // (1 - beta) / (2 beta) at h = 0
  CHECK(sol.gamma_bar1 == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(sol.residual <= 1e-12);
  CHECK(sol.condition_value == doctest::Approx(2.0).epsilon(1e-12));

  SystemParams p15{100, 1.5};
  Landscape1D land15(p15, f);
  auto cps15 = land15.critical_points();
  PrefactorSolution s15 = gamma_bar(cps15[1], f, p15, false);
  CHECK(s15.gamma_bar1 ==
        doctest::Approx((1.0 - 1.5) / (2.0 * 1.5)).epsilon(1e-12));
}

TEST_CASE("gamma_bar: existence condition") {
  SystemParams p{50, 0.5};
  RandomField f = sample_field(FieldDistribution::constant(0.0), 50, 1);
  CriticalPoint z;  // m=0 is the unique critical point; condition 0.5 < 1
  z.m_star = 0.0;
  CHECK_THROWS(gamma_bar(z, f, p, true));
}

TEST_CASE("gamma_bar equals the block secular root on block-constant data") {
  Instance inst(200, 1.5, FieldDistribution::two_valued(0.2), 12);
  PrefactorSolution pf =
      gamma_bar(inst.barrier.saddle, inst.field, inst.params, true);
  CHECK(pf.residual <= 1e-12);
  CHECK(pf.gamma_bar1 < 0.0);

  // two-valued field: the 2-block partition already has one field value per
  // block, so the finite-n eigenvalue equals the limit object exactly
  Partition part = build_partition(inst.field, 2);
  SaddleData sd =
      meso_saddle(inst.barrier.saddle, part, inst.params, inst.field);
  CHECK(sd.gamma_hat1 == doctest::Approx(pf.gamma_bar1).epsilon(1e-8));

  // refining the partition does not move the eigenvalue
  Partition part8 = build_partition(inst.field, 8);
  SaddleData sd8 =
      meso_saddle(inst.barrier.saddle, part8, inst.params, inst.field);
  CHECK(sd8.gamma_hat1 == doctest::Approx(pf.gamma_bar1).epsilon(1e-10));
}

TEST_CASE("sharp capacity: zero field plug-in") {
  SystemParams p{100, 2.0};
  RandomField f = sample_field(FieldDistribution::constant(0.0), 100, 1);
  Landscape1D land(p, f);
  auto cps = land.critical_points();
  BarrierSpec barrier;
  barrier.start = cps[0];
  barrier.deeper = {cps[2]};
  barrier.saddle = cps[1];
  barrier.delta_F = cps[1].F_value - cps[0].F_value;
  double got = sharp_capacity(barrier, f, p, true);
  // counting-measure convention: N ln 2 + ln(beta |gamma1| / 2 pi N), with
  // F(z*) = 0 and beta E - 1 = 1
  double want = 100.0 * std::log(2.0) + std::log(0.5 / (2.0 * M_PI * 100.0));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("mean time: naive ratio identity") {
  Instance inst(150, 1.7, FieldDistribution::two_valued(0.15), 3);
  double sharp = sharp_mean_time(inst.barrier, inst.field, inst.params, true);
  double naive = naive_mean_time(inst.barrier, inst.field, inst.params, true);
  PrefactorSolution pf =
      gamma_bar(inst.barrier.saddle, inst.field, inst.params, true);
  double a = -1.0 + 1.0 / pf.condition_value;
  CHECK(sharp - naive ==
        doctest::Approx(std::log(std::abs(a) / std::abs(pf.gamma_bar1)))
            .epsilon(1e-12));

  // zero field: the ratio is exactly 2
  SystemParams p{100, 2.0};
  RandomField f0 = sample_field(FieldDistribution::constant(0.0), 100, 1);
  Landscape1D land(p, f0);
  auto cps = land.critical_points();
  BarrierSpec b;
  b.start = cps[0];
  b.deeper = {cps[2]};
  b.saddle = cps[1];
  b.delta_F = cps[1].F_value - cps[0].F_value;
  double s0 = sharp_mean_time(b, f0, p, true);
  double n0 = naive_mean_time(b, f0, p, true);
  CHECK(std::exp(s0 - n0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mean time: capacity reconstruction identity") {
  Instance inst(120, 1.6, FieldDistribution::constant(0.05), 1);
  SharpPrediction pred = sharp_prediction(inst.land, inst.barrier, true);
  // log E tau = log(Gaussian well mass) - log Zcap
  double well_mass =
      0.5 * std::log(M_PI * inst.params.N /
                     (2.0 * inst.params.beta * pred.a_m0)) +
      inst.land.log_gibbs_point_asymptotic(inst.barrier.start, true);
  CHECK(pred.log_mean_time ==
        doctest::Approx(well_mass - pred.log_Zcap).epsilon(1e-10));
}

TEST_CASE("sharp_prediction assembles consistently") {
  Instance inst(200, 1.5, FieldDistribution::two_valued(0.2), 12);
  SharpPrediction p = sharp_prediction(inst.land, inst.barrier, true);
  CHECK(p.delta_F > 0.0);
  CHECK(p.gamma_bar1 < 0.0);
  CHECK(p.a_z_star < 0.0);
  CHECK(p.a_m0 > 0.0);
  CHECK(p.log_mean_time > 0.0);
  CHECK(p.log_Zcap ==
        doctest::Approx(
            sharp_capacity(inst.barrier, inst.field, inst.params, true)));
  // analytic mode differs but only slightly for a balanced realization
  SharpPrediction q = sharp_prediction(inst.land, inst.barrier, false);
  CHECK(std::abs(q.gamma_bar1 - p.gamma_bar1) < 0.05);
}

TEST_CASE("naive projection: n=1 is the identity") {
  SystemParams p{40, 1.5};
  RandomField f = sample_field(FieldDistribution::constant(0.0), 40, 1);
  Partition part = build_partition(f, 1);
  LumpedChain lc = lumped_chain(part, p);
  ReversibleChain naive = project_naive_chain(lc);
  REQUIRE(naive.num_states() == lc.chain.num_states());
  for (int s = 0; s < naive.num_states(); ++s)
    CHECK(naive.log_mu(s) == doctest::Approx(lc.chain.log_mu(s)).epsilon(1e-12));
  REQUIRE(naive.num_edges() == lc.chain.num_edges());
  for (int e = 0; e < naive.num_edges(); ++e)
    CHECK(naive.edges()[e].log_c ==
          doctest::Approx(lc.chain.edges()[e].log_c).epsilon(1e-12));
}

TEST_CASE("naive projection: stationary marginal preserved") {
  SystemParams p{20, 1.5};
  RandomField f = sample_field(FieldDistribution::two_valued(0.2), 20, 7);
  Partition part = build_partition(f, 2);
  LumpedChain lc = lumped_chain(part, p);
  ReversibleChain naive = project_naive_chain(lc);
  std::vector<double> marg(p.N + 1, 0.0);
  for (std::int64_t idx = 0; idx < lc.grid.size(); ++idx)
    marg[layer_of(lc.grid, idx)] +=
        std::exp(lc.chain.log_mu(static_cast<int>(idx)));
  for (int M = 0; M <= p.N; ++M)
    CHECK(std::exp(naive.log_mu(M)) ==
          doctest::Approx(marg[M]).epsilon(1e-12));
}

TEST_CASE("naive projection changes the mean hitting time (N=12)") {
  SystemParams p{12, 1.5};
  RandomField f = sample_field(FieldDistribution::two_valued(0.2), 12, 6);
  Partition part = build_partition(f, 2);
  LumpedChain lc = lumped_chain(part, p);
  ReversibleChain naive = project_naive_chain(lc);

  // wells: extreme magnetization layers 2 and 10
  std::vector<int> Al, Bl;
  for (std::int64_t idx = 0; idx < lc.grid.size(); ++idx) {
    int layer = layer_of(lc.grid, idx);
    if (layer == 2) Al.push_back(static_cast<int>(idx));
    if (layer == 10) Bl.push_back(static_cast<int>(idx));
  }
  HittingTimeResult full = mean_hitting_time(lc.chain, Al, Bl);
  HittingTimeResult proj = mean_hitting_time(naive, {2}, {10});
  CHECK(std::abs(full.log_mean - proj.log_mean) > 1e-6);
}
