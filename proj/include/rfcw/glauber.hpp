#pragma once

#include <cstdint>
#include <vector>

#include "rfcw/chain.hpp"
#include "rfcw/meso.hpp"
#include "rfcw/model.hpp"

namespace rfcw {

// Simulation specification.  Exactly one source must be set:
//  - lumped: random walk on a ReversibleChain (states are grid indices)
//  - microscopic: single-spin-flip Metropolis on spin configurations, with
//    targets expressed through the block-magnetization grid of `part`.
// Time is discrete; every step is one proposed flip (holding included).
struct SimSpec {
  const ReversibleChain* lumped = nullptr;

  const Partition* part = nullptr;
  const RandomField* field = nullptr;
  SystemParams params{};

  enum class Start { Fixed, Weighted, GibbsRestricted };
  Start start = Start::Fixed;
  std::int64_t start_state = -1;        // Fixed: lumped/grid state
  std::vector<int> start_set;           // Weighted / GibbsRestricted support
  std::vector<double> start_weights;    // Weighted: probabilities over start_set

  std::vector<std::int64_t> target;     // grid states (nonempty)
  std::int64_t replicas = 1;
  std::uint64_t seed = 1;
  std::int64_t max_steps = 10'000'000'000LL;
};

struct SimResult {
  std::int64_t steps = 0;
  bool truncated = false;
  std::uint64_t trajectory_hash = 0;  // FNV-1a over visited states
};

// One trajectory, fully determined by (spec.seed, replica_index).
SimResult simulate_hitting(const SimSpec& spec, std::int64_t replica_index);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(R), over completed replicas
  std::int64_t replicas = 0;
  std::int64_t truncated = 0;
  bool usable = false;  // false when more than 1% of replicas hit max_steps
  std::vector<std::int64_t> steps;  // per replica (capped when truncated)
  std::vector<char> truncated_flags;
};

// R independent replicas, run in parallel; the aggregate is independent of
// completion order.  threads = 0 picks the hardware concurrency.
McEstimate estimate_mean_time(const SimSpec& spec, int threads = 0);

// Fill spec.start_set / start_weights with the exact harmonic starting
// measure nu_{A,B} of the lumped chain (start well A, target B = spec.target).
void set_exact_nu_start(SimSpec& spec, const std::vector<int>& A);

}  // namespace rfcw
