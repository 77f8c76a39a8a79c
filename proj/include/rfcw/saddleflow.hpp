#pragma once

#include <cstdint>
#include <vector>

#include "rfcw/chain.hpp"
#include "rfcw/landscape.hpp"
#include "rfcw/meso.hpp"
#include "rfcw/model.hpp"

namespace rfcw {

// Box D_N(rho) around the saddle intersected with the slab
// |(x - z*, vcheck)| < nu * rho (vcheck normalized); the narrow tube keeps
// points within nu0 * rho of the principal axis.  nu is shrunk until the
// free energy on the remaining (side) boundary exceeds F(z*).
struct SaddleNeighborhood {
  std::vector<double> z_star;  // continuous saddle coordinates (active blocks)
  std::int64_t z_index = -1;   // nearest grid state
  double rho = 0.0;
  double nu = 0.2;
  double nu0 = 0.05;
  double boundary_excess = 0.0;  // min over side boundary of F(x) - F(z*)
};

SaddleNeighborhood make_neighborhood(const MesoLandscape& landscape,
                                     const SaddleData& saddle,
                                     const MesoGrid& grid, double rho,
                                     double nu = 0.2, double nu0 = 0.05);

// Box radius for the flow construction: a fixed number of Gaussian widths
// 1/sqrt(beta N |gamma_hat_1|) along the unstable direction, clamped away
// from the wells so the monotone routing stays inside the barrier region.
double flow_box_radius(const SaddleData& saddle, const SystemParams& params,
                       const BarrierSpec& barrier, double widths = 2.0);

// g(x) = Phi( (v, x - z*) sqrt(beta N |gamma_hat_1|) ), the Gaussian-CDF
// approximately harmonic function through the saddle.
double test_function(const SaddleData& saddle, const SystemParams& params,
                     const std::vector<double>& x,
                     const std::vector<double>& z_star);

// Max over the box of |L~ g| divided by the analytic envelope
// sqrt(beta|gamma1|/2piN) exp(-beta N |gamma1| (x,v)^2/2) sum_l r_l v_l,
// where L~ is the constant-rate surrogate chain reversible w.r.t. the
// Gaussian surrogate measure.  Scales as O(rho^2).
double harmonic_residual(const SaddleData& saddle,
                         const SaddleNeighborhood& nb, const MesoGrid& grid,
                         const SystemParams& params);

struct SaddleFlowResult {
  UnitFlow flow;
  double clipped_mass = 0.0;     // negative-flow mass rerouted (pre-normalization share)
  double side_exit_mass = 0.0;   // mass leaving through the side boundary
  std::int64_t a_state = -1;     // well states the unit flow connects
  std::int64_t b_state = -1;
};

// Unit flow from the starting well to the deeper well: Gaussian starting
// flow restricted to the tube, Kirchhoff restored by a layer sweep in
// increasing magnetization, boundary flux routed along coordinate-monotone
// paths following the minimal-energy curve.
SaddleFlowResult build_saddle_flow(const MesoLandscape& landscape,
                                   const SaddleData& saddle,
                                   const SaddleNeighborhood& nb,
                                   const LumpedChain& lumped,
                                   const BarrierSpec& barrier);

struct UpperBoundResult {
  double log_numeric = 0.0;      // Dirichlet energy of the plateau extension
  double log_closed_form = 0.0;  // saddle-point evaluation of the same bound
  std::int64_t a_state = -1;
  std::int64_t b_state = -1;
};

UpperBoundResult upper_bound_via_g(const SaddleData& saddle,
                                   const SaddleNeighborhood& nb,
                                   const MesoLandscape& landscape,
                                   const LumpedChain& lumped,
                                   const BarrierSpec& barrier);

// Well states: grid points nearest to the minimal-energy curve at the two
// minima of the barrier, returned as (starting well, deeper minimum across
// the saddle) — hitting times run from .first to .second.
std::pair<std::int64_t, std::int64_t> well_states(
    const MesoLandscape& landscape, const MesoGrid& grid,
    const BarrierSpec& barrier);

}  // namespace rfcw
