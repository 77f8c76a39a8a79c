#include "rfcw/kramers.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rfcw {

namespace {

double mean_over(const RandomField& field, bool empirical,
                 const std::function<double(double)>& f) {
  if (!empirical) return field.dist.expect(f);
  double s = 0.0;
  for (double h : field.h) s += f(h);
  return s / field.size();
}

double tanh2_mean_at(double m, const RandomField& field, double beta,
                     bool empirical) {
  return mean_over(field, empirical, [&](double h) {
    double t = std::tanh(beta * (m + h));
    return 1.0 - t * t;
  });
}

}  // namespace

PrefactorSolution gamma_bar(const CriticalPoint& z_star,
                            const RandomField& field,
                            const SystemParams& params, bool empirical) {
  const double beta = params.beta;
  const double z = z_star.m_star;
  PrefactorSolution sol;
  sol.empirical = empirical;
  sol.condition_value = beta * tanh2_mean_at(z, field, beta, empirical);
  if (!(sol.condition_value > 1.0))
    throw std::runtime_error("gamma_bar: no negative solution (condition fails)");

  // The rate factor is the Metropolis suppression of the up-move at the
  // saddle, exp(-beta [Delta H]_+) with Delta H = -2(z* + h): without it
  // the formula acquires a spurious exp(2 beta (z*+h)) relative to the
  // chain it predicts, and the exact/formula ratio stops being a universal
  // lattice constant.
  auto lhs = [&](double gamma) {
    return mean_over(field, empirical, [&](double h) {
      double t = std::tanh(beta * (z + h));
      double e = std::exp(-2.0 * beta * std::max(-(z + h), 0.0));
      double num = (1.0 - t) * e;
      double den = e / (beta * (1.0 + t));
      return num / (den - 2.0 * gamma);
    });
  };
  double max_den = mean_over(field, empirical, [&](double h) {
    double t = std::tanh(beta * (z + h));
    return std::exp(-2.0 * beta * std::max(-(z + h), 0.0)) / (beta * (1.0 + t));
  });
  double lo = -0.5e3 * (1.0 + max_den), hi = 0.0;
  while (lhs(lo) > 1.0) lo *= 2.0;
  while (hi - lo > 1e-14) {
    double mid = 0.5 * (lo + hi);
    if (lhs(mid) > 1.0)
      hi = mid;
    else
      lo = mid;
  }
  sol.gamma_bar1 = 0.5 * (lo + hi);
  sol.residual = std::abs(lhs(sol.gamma_bar1) - 1.0);
  if (!(sol.gamma_bar1 < 0.0))
    throw std::runtime_error("gamma_bar: root not negative");
  return sol;
}

double sharp_capacity(const BarrierSpec& barrier, const RandomField& field,
                      const SystemParams& params, bool empirical) {
  const double beta = params.beta;
  const double N = params.N;
  PrefactorSolution pf = gamma_bar(barrier.saddle, field, params, empirical);
  // counting-measure normalization (2^N), matching the lumped-chain weights
  return N * std::log(2.0) +
         std::log(beta * std::abs(pf.gamma_bar1) / (2.0 * M_PI * N)) -
         beta * N * barrier.saddle.F_value -
         0.5 * std::log(pf.condition_value - 1.0);
}

namespace {

double mean_time_impl(const BarrierSpec& barrier, const RandomField& field,
                      const SystemParams& params, bool empirical,
                      double prefactor_abs) {
  const double beta = params.beta;
  const double N = params.N;
  double cond_saddle =
      beta * tanh2_mean_at(barrier.saddle.m_star, field, beta, empirical);
  double cond_min =
      beta * tanh2_mean_at(barrier.start.m_star, field, beta, empirical);
  if (!(cond_saddle > 1.0) || !(cond_min < 1.0))
    throw std::runtime_error("mean time: curvature conditions violated");
  return beta * N * barrier.delta_F +
         std::log(2.0 * M_PI * N / (beta * prefactor_abs)) +
         0.5 * std::log((cond_saddle - 1.0) / (1.0 - cond_min));
}

}  // namespace

double sharp_mean_time(const BarrierSpec& barrier, const RandomField& field,
                       const SystemParams& params, bool empirical) {
  PrefactorSolution pf = gamma_bar(barrier.saddle, field, params, empirical);
  return mean_time_impl(barrier, field, params, empirical,
                        std::abs(pf.gamma_bar1));
}

double naive_mean_time(const BarrierSpec& barrier, const RandomField& field,
                       const SystemParams& params, bool empirical) {
  const double beta = params.beta;
  double cond =
      beta * tanh2_mean_at(barrier.saddle.m_star, field, beta, empirical);
  double a = -1.0 + 1.0 / cond;  // negative at the saddle
  return mean_time_impl(barrier, field, params, empirical, std::abs(a));
}

SharpPrediction sharp_prediction(const Landscape1D& landscape,
                                 const BarrierSpec& barrier, bool empirical) {
  const auto& field = landscape.field();
  const auto& params = landscape.params();
  const double beta = params.beta;
  SharpPrediction p;
  p.empirical = empirical;
  p.delta_F = barrier.delta_F;
  PrefactorSolution pf = gamma_bar(barrier.saddle, field, params, empirical);
  p.gamma_bar1 = pf.gamma_bar1;
  p.a_z_star = -1.0 + 1.0 / pf.condition_value;
  p.a_m0 =
      -1.0 + 1.0 / (beta * tanh2_mean_at(barrier.start.m_star, field, beta,
                                         empirical));
  p.log_ZQ_saddle = landscape.log_gibbs_point_asymptotic(barrier.saddle, empirical);
  p.log_Zcap = sharp_capacity(barrier, field, params, empirical);
  p.log_mean_time = sharp_mean_time(barrier, field, params, empirical);
  p.naive_log_mean_time = naive_mean_time(barrier, field, params, empirical);
  return p;
}

ReversibleChain project_naive_chain(const LumpedChain& lumped) {
  const MesoGrid& grid = lumped.grid;
  const int N = grid.N();
  // layer M = sum_l k_l in {0..N}; accumulate log-sum-exp per layer
  struct Acc {
    double mx = -std::numeric_limits<double>::infinity();
    double s = 0.0;
    void add(double lg) {
      if (lg > mx) {
        s = s * std::exp(mx - lg) + 1.0;
        mx = lg;
      } else {
        s += std::exp(lg - mx);
      }
    }
    double value() const {
      return s > 0.0 ? mx + std::log(s)
                     : -std::numeric_limits<double>::infinity();
    }
  };
  std::vector<Acc> mu(N + 1), cond(N + 1);

  auto layer_of = [&](std::int64_t idx) {
    int M = 0;
    for (int l = 0; l < grid.n(); ++l) {
      M += static_cast<int>(idx / grid.stride(l) %
                            (grid.block_sites(l) + 1));
    }
    return M;
  };
  for (std::int64_t idx = 0; idx < grid.size(); ++idx)
    mu[layer_of(idx)].add(lumped.chain.log_mu(static_cast<int>(idx)));
  for (const auto& e : lumped.chain.edges()) {
    // all lumped edges are up-moves: layer(b) = layer(a) + 1
    cond[layer_of(e.a)].add(e.log_c);
  }

  ReversibleChain out(N + 1);
  for (int M = 0; M <= N; ++M) out.set_log_mu(M, mu[M].value());
  for (int M = 0; M < N; ++M) {
    double lc = cond[M].value();
    if (std::isfinite(lc)) out.add_edge(M, M + 1, lc);
  }
  return out;
}

}  // namespace rfcw
