#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfcw/chain.hpp"

namespace rfcw {

struct PotentialSolution {
  std::vector<double> h;      // equilibrium potential, 1 on A, 0 on B
  std::vector<double> e_A;    // equilibrium measure on A (probability that the
                              // chain escapes to B before returning to A)
  double log_cap = 0.0;       // capacity from boundary flux (pot.5)
  double log_cap_dirichlet = 0.0;  // capacity from the Dirichlet form (pot.6)
  double residual = 0.0;      // max interior |L h| / local conductance scale
  std::string method;         // "sparse_ldlt" or "cg"
  int iterations = 0;
  std::vector<int> A, B;
};

struct HittingTimeResult {
  std::vector<double> nu;  // starting measure over A, sums to 1
  double log_mean = 0.0;
  double mean = 0.0;  // exp(log_mean), may overflow to inf for huge barriers
  std::string method;  // exact | formula | monte_carlo
  double stderr_rel = 0.0;
};

struct FlowDiagnostics {
  bool ok = false;
  std::string violated;  // empty when ok; otherwise first violated clause
  int offending_state = -1;
  double worst = 0.0;
};

struct BkBound {
  double log_value = 0.0;
  double rel_stderr = 0.0;  // 0 in exact mode
  std::int64_t paths = 0;
  std::string method;  // exact_enumeration | monte_carlo
};

// Harmonic solve with h=1 on A, h=0 on B; capacity via both (pot.5) and
// the Dirichlet form, cross-checked.
PotentialSolution solve_potential(const ReversibleChain& chain,
                                  const std::vector<int>& A,
                                  const std::vector<int>& B);

// E_{nu_{A,B}} tau_B via (pot.12): sum_x mu(x) h(x) / cap.
HittingTimeResult mean_hitting_time(const ReversibleChain& chain,
                                    const std::vector<int>& A,
                                    const std::vector<int>& B);

// Deep-barrier variants.  When the barrier between A and B is much deeper
// than -log(machine epsilon), the equilibrium potential saturates to 1 up
// to roundoff throughout the wells and both capacity forms lose all
// significant digits (the flux form can even underflow to zero).  These
// variants first grow A and B into "blobs": every state at least
// exp(theta) heavier than the bottleneck level of the A-B crossing is
// absorbed into the nearer of the two sets (growth happens along paths of
// such heavy states, so the blobs can never touch).  That caps the dynamic
// range of 1 - h at exp(-theta) while perturbing the capacity and the mean
// hitting time only by a relative O(exp(-theta)).
PotentialSolution solve_potential_metastable(const ReversibleChain& chain,
                                             const std::vector<int>& A,
                                             const std::vector<int>& B,
                                             double theta = 20.0);

HittingTimeResult mean_hitting_time_metastable(const ReversibleChain& chain,
                                               const std::vector<int>& A,
                                               const std::vector<int>& B,
                                               double theta = 20.0);

// Independent oracle: first-step analysis solve of E_x tau_B for all x.
std::vector<double> first_step_hitting_times(const ReversibleChain& chain,
                                             const std::vector<int>& B);

UnitFlow harmonic_flow(const ReversibleChain& chain,
                       const PotentialSolution& sol);

FlowDiagnostics validate_flow(const ReversibleChain& chain,
                              const UnitFlow& flow, double tol = 1e-12);

struct BkOptions {
  bool monte_carlo = false;
  std::int64_t mc_paths = 10000;
  std::uint64_t seed = 1;
  std::int64_t enumeration_cap = 1000000;  // beyond this, MC is forced
};

BkBound bk_lower_bound(const ReversibleChain& chain, const UnitFlow& flow,
                       const BkOptions& opts = {});

// Dirichlet principle upper bound Phi(u); u must be 1 on A, 0 on B, in [0,1].
double dirichlet_upper_bound(const ReversibleChain& chain,
                             const std::vector<double>& u,
                             const std::vector<int>& A,
                             const std::vector<int>& B);

// Verifies mu-symmetry of the Green function and the single-point identity
// G(x,a) = h_{a,B}(x) / (mu(a) e_{a,B}(a) / mu(a)).  Returns the max
// relative deviation.  Small chains only.
double green_identity_check(const ReversibleChain& chain, int a,
                            const std::vector<int>& B);

}  // namespace rfcw
