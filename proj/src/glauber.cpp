#include "rfcw/glauber.hpp"

#include "rfcw/potential.hpp"
#include "rfcw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

namespace rfcw {

namespace {

constexpr std::uint64_t kSimStreamBase = 0x20000;

inline void fnv(std::uint64_t& h, std::uint64_t v) {
  h ^= v;
  h *= 1099511628211ULL;
}

double lchoose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_spec(const SimSpec& spec) {
  if ((spec.lumped != nullptr) == (spec.part != nullptr))
    throw std::invalid_argument("SimSpec: exactly one source must be set");
  if (spec.part && !spec.field)
    throw std::invalid_argument("SimSpec: microscopic source needs a field");
  if (spec.target.empty()) throw std::invalid_argument("SimSpec: empty target");
  if (spec.replicas < 1) throw std::invalid_argument("SimSpec: replicas < 1");
  if (spec.max_steps <= 0) throw std::invalid_argument("SimSpec: max_steps");
  if (spec.start == SimSpec::Start::Fixed && spec.start_state < 0)
    throw std::invalid_argument("SimSpec: fixed start without a state");
  if (spec.start == SimSpec::Start::Weighted &&
      (spec.start_set.empty() ||
       spec.start_set.size() != spec.start_weights.size()))
    throw std::invalid_argument("SimSpec: weighted start needs set + weights");
  if (spec.start == SimSpec::Start::GibbsRestricted && spec.start_set.empty())
    throw std::invalid_argument("SimSpec: restricted start needs a set");
}

int pick_weighted(const std::vector<double>& w, CounterRng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.next_double() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

// transition table of a lumped chain: per state the cumulative move
// probabilities; the remainder up to 1 is the holding probability
struct LumpedTable {
  std::vector<std::vector<std::pair<double, int>>> moves;

  explicit LumpedTable(const ReversibleChain& chain) {
    const auto& adj = chain.adjacency();
    const auto& edges = chain.edges();
    moves.resize(chain.num_states());
    for (int s = 0; s < chain.num_states(); ++s) {
      double cum = 0.0;
      for (int e : adj[s]) {
        int other = edges[e].a == s ? edges[e].b : edges[e].a;
        cum += std::exp(edges[e].log_c - chain.log_mu(s));
        moves[s].push_back({cum, other});
      }
      if (cum > 1.0 + 1e-9)
        throw std::runtime_error("lumped chain: transition row exceeds 1");
    }
  }
};

SimResult run_lumped(const SimSpec& spec, const LumpedTable& table,
                     std::int64_t s0, CounterRng& rng) {
  std::unordered_set<std::int64_t> target(spec.target.begin(),
                                          spec.target.end());
  SimResult res;
  std::uint64_t h = 1469598103934665603ULL;
  std::int64_t s = s0;
  fnv(h, static_cast<std::uint64_t>(s));
  while (!target.count(s)) {
    if (res.steps >= spec.max_steps) {
      res.truncated = true;
      break;
    }
    double u = rng.next_double();
    const auto& row = table.moves[s];
    for (const auto& [cum, next] : row) {
      if (u < cum) {
        s = next;
        fnv(h, static_cast<std::uint64_t>(s));
        break;
      }
    }
    ++res.steps;
  }
  res.trajectory_hash = h;
  return res;
}

// microscopic state: spins plus derived block counts / grid index
struct MicroState {
  std::vector<std::int8_t> sigma;
  std::vector<int> k;  // up-spins per block
  std::int64_t idx = 0;
  double m = 0.0;
};

struct MicroCtx {
  const SimSpec& spec;
  const Partition& part;
  const RandomField& field;
  MesoGrid grid;
  std::vector<int> site_block;

  explicit MicroCtx(const SimSpec& s)
      : spec(s), part(*s.part), field(*s.field), grid(*s.part, s.params.N) {
    site_block.resize(s.params.N, -1);
    for (int l = 0; l < part.n; ++l)
      for (int i : part.blocks[l]) site_block[i] = l;
  }

  // configuration at a grid state; which spins are up within each block is
  // drawn uniformly (exact Gibbs conditional for block-constant fields)
  MicroState assemble(std::int64_t grid_state, CounterRng& rng) const {
    MicroState st;
    st.sigma.assign(spec.params.N, -1);
    st.k = grid.coords(grid_state);
    st.idx = grid_state;
    for (int l = 0; l < part.n; ++l) {
      std::vector<int> sites = part.blocks[l];
      for (int j = 0; j < st.k[l]; ++j) {
        std::size_t pick = j + rng.next_below(sites.size() - j);
        std::swap(sites[j], sites[pick]);
        st.sigma[sites[j]] = 1;
      }
    }
    st.m = grid.magnetization(grid_state);
    return st;
  }

  void flip(MicroState& st, int i) const {
    const double N = spec.params.N;
    int l = site_block[i];
    if (st.sigma[i] > 0) {
      st.sigma[i] = -1;
      st.k[l] -= 1;
      st.idx -= grid.stride(l);
      st.m -= 2.0 / N;
    } else {
      st.sigma[i] = 1;
      st.k[l] += 1;
      st.idx += grid.stride(l);
      st.m += 2.0 / N;
    }
  }

  // one proposed flip; returns the flipped site, or -1 on a hold
  int step(MicroState& st, CounterRng& rng) const {
    int i = static_cast<int>(rng.next_below(spec.params.N));
    double dH =
        2.0 * st.sigma[i] * (st.m + field.h[i]) - 2.0 / spec.params.N;
    if (dH > 0.0 && rng.next_double() >= std::exp(-spec.params.beta * dH))
      return -1;
    flip(st, i);
    return i;
  }

  double log_weight(std::int64_t grid_state) const {
    auto x = grid.point(grid_state);
    double lw = spec.params.beta * spec.params.N * meso_energy(part, x);
    auto k = grid.coords(grid_state);
    for (int l = 0; l < part.n; ++l)
      lw += lchoose(grid.block_sites(l), k[l]);
    return lw;
  }
};

std::int64_t draw_start_state(const SimSpec& spec, const MicroCtx* micro,
                              CounterRng& rng) {
  switch (spec.start) {
    case SimSpec::Start::Fixed:
      return spec.start_state;
    case SimSpec::Start::Weighted:
      return spec.start_set[pick_weighted(spec.start_weights, rng)];
    case SimSpec::Start::GibbsRestricted: {
      std::vector<double> lw(spec.start_set.size());
      for (std::size_t i = 0; i < spec.start_set.size(); ++i)
        lw[i] = spec.lumped ? spec.lumped->log_mu(spec.start_set[i])
                            : micro->log_weight(spec.start_set[i]);
      double mx = *std::max_element(lw.begin(), lw.end());
      std::vector<double> w(lw.size());
      for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - mx);
      return spec.start_set[pick_weighted(w, rng)];
    }
  }
  throw std::logic_error("unreachable");
}

SimResult run_micro(const SimSpec& spec, const MicroCtx& ctx, CounterRng& rng) {
  std::int64_t s0 = draw_start_state(spec, &ctx, rng);
  MicroState st = ctx.assemble(s0, rng);

  if (spec.start == SimSpec::Start::GibbsRestricted &&
      !ctx.part.block_constant()) {
    // the uniform-within-block conditional is only exact for block-constant
    // fields; otherwise equilibrate inside the start set first
    std::unordered_set<std::int64_t> keep(spec.start_set.begin(),
                                          spec.start_set.end());
    std::int64_t burn = 50LL * spec.params.N * spec.params.N;
    for (std::int64_t t = 0; t < burn; ++t) {
      int i = ctx.step(st, rng);
      if (i >= 0 && !keep.count(st.idx)) ctx.flip(st, i);  // reject the exit
    }
  }

  std::unordered_set<std::int64_t> target(spec.target.begin(),
                                          spec.target.end());
  SimResult res;
  std::uint64_t h = 1469598103934665603ULL;
  fnv(h, static_cast<std::uint64_t>(st.idx));
  while (!target.count(st.idx)) {
    if (res.steps >= spec.max_steps) {
      res.truncated = true;
      break;
    }
    if (ctx.step(st, rng) >= 0) fnv(h, static_cast<std::uint64_t>(st.idx));
    ++res.steps;
  }
  res.trajectory_hash = h;
  return res;
}

}  // namespace

SimResult simulate_hitting(const SimSpec& spec, std::int64_t replica_index) {
  check_spec(spec);
  CounterRng rng(spec.seed, kSimStreamBase + replica_index);
  if (spec.lumped) {
    LumpedTable table(*spec.lumped);
    std::int64_t s0 = draw_start_state(spec, nullptr, rng);
    return run_lumped(spec, table, s0, rng);
  }
  MicroCtx ctx(spec);
  return run_micro(spec, ctx, rng);
}

McEstimate estimate_mean_time(const SimSpec& spec, int threads) {
  check_spec(spec);
  const std::int64_t R = spec.replicas;
  McEstimate est;
  est.replicas = R;
  est.steps.assign(R, 0);
  est.truncated_flags.assign(R, 0);

  // shared read-only context, built once
  const LumpedTable* table = nullptr;
  LumpedTable* owned_table = nullptr;
  MicroCtx* micro = nullptr;
  if (spec.lumped) {
    owned_table = new LumpedTable(*spec.lumped);
    table = owned_table;
  } else {
    micro = new MicroCtx(spec);
  }

  int K = threads > 0 ? threads
                      : std::max(1u, std::thread::hardware_concurrency());
  K = static_cast<int>(std::min<std::int64_t>(K, R));
  auto worker = [&](int t) {
    for (std::int64_t r = t; r < R; r += K) {
      CounterRng rng(spec.seed, kSimStreamBase + r);
      SimResult sr;
      if (table) {
        std::int64_t s0 = draw_start_state(spec, nullptr, rng);
        sr = run_lumped(spec, *table, s0, rng);
      } else {
        sr = run_micro(spec, *micro, rng);
      }
      est.steps[r] = sr.steps;
      est.truncated_flags[r] = sr.truncated ? 1 : 0;
    }
  };
  if (K == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < K; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  delete owned_table;
  delete micro;

  // aggregate over completed replicas, in replica order (thread-count
  // independent)
  std::int64_t done = 0;
  double mean = 0.0;
  for (std::int64_t r = 0; r < R; ++r) {
    if (est.truncated_flags[r]) {
      ++est.truncated;
      continue;
    }
    ++done;
    mean += (static_cast<double>(est.steps[r]) - mean) / done;
  }
  double var = 0.0;
  std::int64_t i = 0;
  for (std::int64_t r = 0; r < R; ++r) {
    if (est.truncated_flags[r]) continue;
    double d = static_cast<double>(est.steps[r]) - mean;
    var += (d * d - var) / ++i;
  }
  est.mean = mean;
  est.stderr_ = done > 1 ? std::sqrt(var / (done - 1)) : 0.0;
  est.usable = done > 0 && est.truncated * 100 <= R;
  return est;
}

void set_exact_nu_start(SimSpec& spec, const std::vector<int>& A) {
  if (!spec.lumped)
    throw std::invalid_argument(
        "exact starting measure requires a lumped chain");
  std::vector<int> B;
  B.reserve(spec.target.size());
  for (std::int64_t t : spec.target) B.push_back(static_cast<int>(t));
  HittingTimeResult ht = mean_hitting_time(*spec.lumped, A, B);
  spec.start = SimSpec::Start::Weighted;
  spec.start_set = A;
  spec.start_weights = ht.nu;
}

}  // namespace rfcw
