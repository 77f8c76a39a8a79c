#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "rfcw/model.hpp"

namespace rfcw {

struct LogMgf {
  double value;   // U(t)
  double deriv;   // U'(t), strictly increasing with range (-1,1)
  double deriv2;  // U''(t), in (0,1]
};

struct LegendreResult {
  double rate;    // I(m) = sup_t (t m - U(t)) >= 0
  double t_star;  // the maximizing t, root of U'(t) = m
  double deriv2;  // I''(m) = 1 / U''(t*)
};

struct CriticalPoint {
  double m_star = 0.0;
  bool is_minimum = false;
  double F_value = 0.0;         // m*^2/2 - (1/(beta N)) sum ln cosh(beta(m*+h_i))
  double curvature_a = 0.0;     // -1 + 1/(beta U''(beta m*))
  double susceptibility = 0.0;  // beta U''(beta m*); <1 at minima, >1 at maxima
};

struct BarrierSpec {
  CriticalPoint start;                // local minimum m0*
  std::vector<CriticalPoint> deeper;  // the set M, F strictly below F(m0*)
  CriticalPoint saddle;               // z*, minimax between m0* and M
  double delta_F = 0.0;               // F(z*) - F(m0*) > 0
};

// One-dimensional random free-energy landscape for a fixed field realization.
// All members are pure; the object is immutable after construction.
class Landscape1D {
 public:
  Landscape1D(SystemParams params, RandomField field);

  const SystemParams& params() const { return params_; }
  const RandomField& field() const { return field_; }

  // U(t) = (1/N) sum ln cosh(t + beta h_i) and first two derivatives.
  LogMgf log_mgf(double t) const;

  // Legendre-Fenchel transform of U at m in (-1,1).
  LegendreResult legendre(double m) const;

  // F(m) = -m^2/2 + I(m)/beta. Domain (-1,1); queries clamp to +-(1-2/N).
  double free_energy(double m) const;

  // All critical points of F, ordered by m, alternating min/max.
  std::vector<CriticalPoint> critical_points() const;

  // Z*Q(m*) prediction at a critical point. empirical=true averages
  // 1-tanh^2 over the realized h_i, otherwise over the distribution.
  double gibbs_point_asymptotic(const CriticalPoint& cp, bool empirical) const;
  double log_gibbs_point_asymptotic(const CriticalPoint& cp,
                                    bool empirical) const;

  // Mean of 1 - tanh^2(beta(m + h)) at a point m.
  double tanh2_mean(double m, bool empirical) const;

  BarrierSpec barrier(const CriticalPoint& from_min,
                      double tie_tolerance = 1e-9) const;

  // CSV rows m,F,I,a over a uniform grid.
  void write_csv(std::ostream& os, int grid_points) const;

 private:
  CriticalPoint classify(double m) const;

  SystemParams params_;
  RandomField field_;
  std::vector<double> beta_h_;  // cached beta*h_i
};

}  // namespace rfcw
