#pragma once

#include "rfcw/landscape.hpp"
#include "rfcw/meso.hpp"
#include "rfcw/model.hpp"

namespace rfcw {

struct PrefactorSolution {
  double gamma_bar1 = 0.0;       // unique negative root of the rate equation
  double condition_value = 0.0;  // beta * mean(1 - tanh^2(beta(z*+h)))
  double residual = 0.0;         // defining equation residual at the root
  bool empirical = true;         // mean over realized h_i vs the distribution
};

// Solve E[num/(den - 2 gamma)] = 1 for gamma < 0, where
//   num = (1 - tanh(beta(z*+h))) exp(-2 beta [z*+h]_+)
//   den = exp(-2 beta [z*+h]_+) / (beta (1 + tanh(beta(z*+h)))).
// empirical mode averages over the realized field (one block per site).
PrefactorSolution gamma_bar(const CriticalPoint& z_star,
                            const RandomField& field,
                            const SystemParams& params, bool empirical);

struct SharpPrediction {
  double log_ZQ_saddle = 0.0;
  double log_Zcap = 0.0;
  double log_mean_time = 0.0;
  double naive_log_mean_time = 0.0;
  double delta_F = 0.0;
  double gamma_bar1 = 0.0;
  double a_z_star = 0.0;  // landscape curvature at the saddle, negative
  double a_m0 = 0.0;      // curvature at the starting minimum, positive
  bool empirical = true;
};

// log of the Z*cap prediction across the barrier.
double sharp_capacity(const BarrierSpec& barrier, const RandomField& field,
                      const SystemParams& params, bool empirical);

// log of the predicted mean crossing time (sharp prefactor).
double sharp_mean_time(const BarrierSpec& barrier, const RandomField& field,
                       const SystemParams& params, bool empirical);

// Same expression with |gamma_bar1| replaced by |a(z*)|: the prediction the
// projected one-dimensional dynamics would give.
double naive_mean_time(const BarrierSpec& barrier, const RandomField& field,
                       const SystemParams& params, bool empirical);

SharpPrediction sharp_prediction(const Landscape1D& landscape,
                                 const BarrierSpec& barrier, bool empirical);

// Exact projection of a lumped chain onto total magnetization: conductances
// and stationary weights summed per magnetization layer.  Birth-death chain
// on {0..N} with state M <-> m = (2M - N)/N.
ReversibleChain project_naive_chain(const LumpedChain& lumped);

}  // namespace rfcw
