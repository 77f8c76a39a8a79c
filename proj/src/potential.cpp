#include "rfcw/potential.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

#include "rfcw/rng.hpp"

namespace rfcw {

namespace {

constexpr int kSparseDirectLimit = 2'000'000;

double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct Boundary {
  std::vector<char> on_A, on_B;
  Boundary(int n, const std::vector<int>& A, const std::vector<int>& B)
      : on_A(n, 0), on_B(n, 0) {
    for (int a : A) on_A[a] = 1;
    for (int b : B) on_B[b] = 1;
    for (int a : A)
      if (on_B[a]) throw std::invalid_argument("A and B must be disjoint");
  }
  bool interior(int x) const { return !on_A[x] && !on_B[x]; }
};

// Solve the conductance Laplacian with Dirichlet data: for interior x,
// sum_y c(x,y) (h(x) - h(y)) = rhs(x), with h fixed on the boundary.
// Conductances are rescaled by exp(-shift) before assembly.
struct LaplaceSolve {
  std::vector<double> h;
  std::string method;
  int iterations = 0;
};

LaplaceSolve solve_dirichlet(const ReversibleChain& chain,
                             const std::vector<char>& fixed,
                             const std::vector<double>& fixed_value,
                             const std::vector<double>& rhs_scaled,
                             double shift) {
  const int n = chain.num_states();

  // After rescaling, conductances in regions far lighter than the scale
  // underflow to zero.  States cut off from every Dirichlet anchor would
  // make the system singular (LDLT silently yields NaN), so pin them at 0;
  // they carry no flux and no Dirichlet energy.
  std::vector<char> anchored(n, 0);
  {
    std::vector<int> stack;
    for (int x = 0; x < n; ++x)
      if (fixed[x]) {
        anchored[x] = 1;
        stack.push_back(x);
      }
    const auto& adj = chain.adjacency();
    const auto& edges = chain.edges();
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int e : adj[x]) {
        if (std::exp(edges[e].log_c - shift) == 0.0) continue;
        int y = edges[e].a == x ? edges[e].b : edges[e].a;
        if (!anchored[y]) {
          anchored[y] = 1;
          stack.push_back(y);
        }
      }
    }
  }

  std::vector<int> idx(n, -1);
  int m = 0;
  for (int x = 0; x < n; ++x)
    if (!fixed[x] && anchored[x]) idx[x] = m++;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(chain.num_edges() * 4);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  std::vector<double> diag(m, 0.0);
  for (const auto& e : chain.edges()) {
    double c = std::exp(e.log_c - shift);
    if (c == 0.0) continue;
    int ia = idx[e.a], ib = idx[e.b];
    if (ia >= 0) diag[ia] += c;
    if (ib >= 0) diag[ib] += c;
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -c);
      trip.emplace_back(ib, ia, -c);
    } else if (ia >= 0) {
      b[ia] += c * fixed_value[e.b];
    } else if (ib >= 0) {
      b[ib] += c * fixed_value[e.a];
    }
  }
  for (int i = 0; i < m; ++i) trip.emplace_back(i, i, diag[i]);
  for (int x = 0; x < n; ++x)
    if (idx[x] >= 0) b[idx[x]] += rhs_scaled[x];

  Eigen::SparseMatrix<double> L(m, m);
  L.setFromTriplets(trip.begin(), trip.end());

  LaplaceSolve out;
  out.h.assign(n, 0.0);
  Eigen::VectorXd sol;
  bool solved = false;
  if (m <= kSparseDirectLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
    if (ldlt.info() == Eigen::Success) {
      sol = ldlt.solve(b);
      solved = ldlt.info() == Eigen::Success;
      out.method = "sparse_ldlt";
    }
  }
  if (!solved) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(L);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(50 * static_cast<int>(std::sqrt(double(m))) + 1000);
    sol = cg.solve(b);
    out.method = "cg";
    out.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success && cg.error() > 1e-10)
      throw std::runtime_error("linear solver failed, residual " +
                               std::to_string(cg.error()));
    solved = true;
  }
  for (int x = 0; x < n; ++x)
    out.h[x] = fixed[x] ? fixed_value[x] : (idx[x] >= 0 ? sol[idx[x]] : 0.0);
  return out;
}

double max_log_c(const ReversibleChain& chain) {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& e : chain.edges()) s = std::max(s, e.log_c);
  return s;
}

}  // namespace

PotentialSolution solve_potential(const ReversibleChain& chain,
                                  const std::vector<int>& A,
                                  const std::vector<int>& B) {
  if (A.empty() || B.empty())
    throw std::invalid_argument("A and B must be nonempty");
  if (!chain.connected(A, B))
    throw std::runtime_error("A and B are not connected (infinite resistance)");
  const int n = chain.num_states();
  Boundary bd(n, A, B);

  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0), rhs(n, 0.0);
  for (int a : A) {
    fixed[a] = 1;
    value[a] = 1.0;
  }
  for (int b : B) fixed[b] = 1;

  // Rescale by the largest conductance seen by the solve itself (edges with
  // at least one free endpoint).  Edges buried inside A or B carry no
  // potential difference, and using their (possibly exponentially larger)
  // conductance as the scale would underflow the capacity at deep barriers.
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& e : chain.edges())
    if (!fixed[e.a] || !fixed[e.b]) shift = std::max(shift, e.log_c);
  if (!std::isfinite(shift)) shift = max_log_c(chain);
  LaplaceSolve ls = solve_dirichlet(chain, fixed, value, rhs, shift);

  PotentialSolution sol;
  sol.h = std::move(ls.h);
  sol.method = ls.method;
  sol.iterations = ls.iterations;
  sol.A = A;
  sol.B = B;
  // clamp roundoff outside [0,1]
  for (double& v : sol.h) v = std::clamp(v, 0.0, 1.0);

  const auto& adj = chain.adjacency();
  const auto& edges = chain.edges();

  // capacity via boundary flux out of A (pot.5), scaled space
  double cap_flux = 0.0;
  sol.e_A.assign(A.size(), 0.0);
  for (std::size_t k = 0; k < A.size(); ++k) {
    int a = A[k];
    double flux = 0.0;
    for (int e : adj[a]) {
      int y = edges[e].a == a ? edges[e].b : edges[e].a;
      double d = sol.h[a] - sol.h[y];
      if (d == 0.0) continue;  // intra-A edge; conductance may overflow
      flux += std::exp(edges[e].log_c - shift) * d;
    }
    cap_flux += flux;
    // escape probability: mu(a) e(a) / mu(a) = flux / mu_scaled(a)
    sol.e_A[k] = flux / std::exp(chain.log_mu(a) - shift);
  }

  // capacity via the Dirichlet form, compensated summation
  double cap_dir = 0.0, comp = 0.0;
  for (const auto& e : edges) {
    double d = sol.h[e.a] - sol.h[e.b];
    if (d == 0.0) continue;
    double term = std::exp(e.log_c - shift) * d * d;
    double y = term - comp;
    double t = cap_dir + y;
    comp = (t - cap_dir) - y;
    cap_dir = t;
  }

  if (!(cap_flux > 0.0) || !(cap_dir > 0.0))
    throw std::runtime_error(
        "capacity vanished (disconnected or degenerate): flux=" +
        std::to_string(cap_flux) + " dir=" + std::to_string(cap_dir) +
        " method=" + sol.method);
  sol.log_cap = shift + std::log(cap_flux);
  sol.log_cap_dirichlet = shift + std::log(cap_dir);

  // interior residual, normalized by the local conductance scale
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    if (!bd.interior(x)) continue;
    double r = 0.0, scale = 0.0;
    for (int e : adj[x]) {
      int y = edges[e].a == x ? edges[e].b : edges[e].a;
      double c = std::exp(edges[e].log_c - shift);
      r += c * (sol.h[x] - sol.h[y]);
      scale += c;
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(r) / scale);
  }
  sol.residual = worst;
  return sol;
}

namespace {

HittingTimeResult mean_time_from_solution(const ReversibleChain& chain,
                                          const PotentialSolution& sol) {
  const int n = chain.num_states();
  const std::vector<int>& A = sol.A;
  // log sum_x mu(x) h(x)
  std::vector<double> terms;
  terms.reserve(n);
  for (int x = 0; x < n; ++x)
    if (sol.h[x] > 0.0) terms.push_back(chain.log_mu(x) + std::log(sol.h[x]));
  double log_num = logsumexp(terms);

  HittingTimeResult res;
  res.log_mean = log_num - sol.log_cap;
  res.mean = std::exp(res.log_mean);
  res.method = "exact";
  // nu proportional to mu(a) * escape probability
  res.nu.assign(A.size(), 0.0);
  double tot = 0.0;
  double mmax = -std::numeric_limits<double>::infinity();
  std::vector<double> lognu(A.size());
  for (std::size_t k = 0; k < A.size(); ++k) {
    lognu[k] = sol.e_A[k] > 0.0
                   ? chain.log_mu(A[k]) + std::log(sol.e_A[k])
                   : -std::numeric_limits<double>::infinity();
    mmax = std::max(mmax, lognu[k]);
  }
  for (std::size_t k = 0; k < A.size(); ++k) {
    res.nu[k] = std::exp(lognu[k] - mmax);
    tot += res.nu[k];
  }
  for (double& v : res.nu) v /= tot;
  return res;
}

// Grow A and B into blobs of states heavier than the bottleneck level of
// the crossing by at least exp(theta).  The bottleneck level is the minimax
// of -log_mu over paths from A to B (a widest-path Dijkstra); growth only
// passes through states strictly heavier than the bottleneck, so the two
// blobs stay disjoint.
std::pair<std::vector<int>, std::vector<int>> grow_metastable_sets(
    const ReversibleChain& chain, const std::vector<int>& A,
    const std::vector<int>& B, double theta) {
  const int n = chain.num_states();
  const auto& adj = chain.adjacency();
  const auto& edges = chain.edges();
  auto weight = [&](int x) { return -chain.log_mu(x); };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int a : A) {
    dist[a] = weight(a);
    pq.emplace(dist[a], a);
  }
  std::vector<char> in_B(n, 0);
  for (int b : B) in_B[b] = 1;
  double bottleneck = inf;
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    if (in_B[x]) {
      bottleneck = std::max(d, weight(x));
      break;
    }
    for (int e : adj[x]) {
      int y = edges[e].a == x ? edges[e].b : edges[e].a;
      double nd = std::max(d, weight(y));
      if (nd < dist[y]) {
        dist[y] = nd;
        pq.emplace(nd, y);
      }
    }
  }
  if (!std::isfinite(bottleneck))
    throw std::runtime_error("A and B are not connected (infinite resistance)");

  const double threshold = bottleneck - theta;
  // States far lighter than the bottleneck are irrelevant to the crossing
  // but stretch the conductance range beyond what a double-precision solve
  // tolerates.  Pin them at h = 0 by adding them to B: the capacity picked
  // up through such light states is a relative O(exp(-2 theta)), as is the
  // stationary mass mis-assigned in the mean-time numerator.
  const double light = bottleneck + 2.0 * theta;
  auto grow = [&](const std::vector<int>& seeds) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = seeds, out;
    for (int s : seeds) seen[s] = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      out.push_back(x);
      for (int e : adj[x]) {
        int y = edges[e].a == x ? edges[e].b : edges[e].a;
        if (!seen[y] && weight(y) <= threshold) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  auto Astar = grow(A);
  auto Bstar = grow(B);
  std::vector<char> taken(n, 0);
  for (int x : Astar) taken[x] = 1;
  for (int x : Bstar) taken[x] = 1;
  for (int x = 0; x < n; ++x)
    if (!taken[x] && weight(x) > light) Bstar.push_back(x);
  std::sort(Bstar.begin(), Bstar.end());
  return {Astar, Bstar};
}

}  // namespace

HittingTimeResult mean_hitting_time(const ReversibleChain& chain,
                                    const std::vector<int>& A,
                                    const std::vector<int>& B) {
  return mean_time_from_solution(chain, solve_potential(chain, A, B));
}

PotentialSolution solve_potential_metastable(const ReversibleChain& chain,
                                             const std::vector<int>& A,
                                             const std::vector<int>& B,
                                             double theta) {
  auto [Astar, Bstar] = grow_metastable_sets(chain, A, B, theta);
  return solve_potential(chain, Astar, Bstar);
}

HittingTimeResult mean_hitting_time_metastable(const ReversibleChain& chain,
                                               const std::vector<int>& A,
                                               const std::vector<int>& B,
                                               double theta) {
  return mean_time_from_solution(
      chain, solve_potential_metastable(chain, A, B, theta));
}

std::vector<double> first_step_hitting_times(const ReversibleChain& chain,
                                             const std::vector<int>& B) {
  const int n = chain.num_states();
  std::vector<char> fixed(n, 0);
  std::vector<double> value(n, 0.0), rhs(n, 0.0);
  for (int b : B) fixed[b] = 1;
  const double shift = max_log_c(chain);
  for (int x = 0; x < n; ++x)
    if (!fixed[x]) rhs[x] = std::exp(chain.log_mu(x) - shift);
  return solve_dirichlet(chain, fixed, value, rhs, shift).h;
}

UnitFlow harmonic_flow(const ReversibleChain& chain,
                       const PotentialSolution& sol) {
  // scale by the capacity itself: arc values are c |dh| / cap, and any other
  // scale under/overflows once the barrier is deep
  const double shift = sol.log_cap;
  double cap = 1.0;
  UnitFlow flow;
  flow.source = sol.A;
  flow.sink = sol.B;
  const auto& edges = chain.edges();
  for (int e = 0; e < chain.num_edges(); ++e) {
    double d = sol.h[edges[e].a] - sol.h[edges[e].b];
    if (d == 0.0) continue;
    int from = d > 0.0 ? edges[e].a : edges[e].b;
    int to = d > 0.0 ? edges[e].b : edges[e].a;
    double v = std::exp(edges[e].log_c - shift) * std::abs(d) / cap;
    if (v > 0.0) flow.arcs.push_back({from, to, e, v});
  }
  return flow;
}

FlowDiagnostics validate_flow(const ReversibleChain& chain,
                              const UnitFlow& flow, double tol) {
  FlowDiagnostics diag;
  const int n = chain.num_states();
  std::vector<char> in_A(n, 0), in_B(n, 0);
  for (int a : flow.source) in_A[a] = 1;
  for (int b : flow.sink) in_B[b] = 1;

  // (i) antisymmetric support: no pair with positive flow both ways
  {
    std::vector<std::pair<int, int>> seen;
    seen.reserve(flow.arcs.size());
    for (const auto& arc : flow.arcs) {
      if (arc.value <= 0.0) continue;
      seen.emplace_back(arc.from, arc.to);
    }
    std::sort(seen.begin(), seen.end());
    for (const auto& [f, t] : seen) {
      if (std::binary_search(seen.begin(), seen.end(), std::make_pair(t, f))) {
        diag.violated = "antisymmetry";
        diag.offending_state = f;
        return diag;
      }
    }
  }

  // (ii) Kirchhoff at interior vertices
  std::vector<double> in(n, 0.0), out(n, 0.0);
  for (const auto& arc : flow.arcs) {
    out[arc.from] += arc.value;
    in[arc.to] += arc.value;
  }
  for (int x = 0; x < n; ++x) {
    if (in_A[x] || in_B[x]) continue;
    double scale = std::max({in[x], out[x], 1.0});
    double r = std::abs(in[x] - out[x]) / scale;
    if (r > tol) {
      diag.violated = "kirchhoff";
      diag.offending_state = x;
      diag.worst = r;
      return diag;
    }
  }

  // (iii) unit normalization out of A and into B
  double outA = 0.0, inB = 0.0;
  for (const auto& arc : flow.arcs) {
    if (in_A[arc.from] && !in_A[arc.to]) outA += arc.value;
    if (in_A[arc.to] && !in_A[arc.from]) outA -= arc.value;
    if (in_B[arc.to] && !in_B[arc.from]) inB += arc.value;
    if (in_B[arc.from] && !in_B[arc.to]) inB -= arc.value;
  }
  if (std::abs(outA - 1.0) > tol * 10 || std::abs(inB - 1.0) > tol * 10) {
    diag.violated = "normalization";
    diag.worst = std::max(std::abs(outA - 1.0), std::abs(inB - 1.0));
    return diag;
  }

  // (iv) acyclicity of the support digraph (Kahn)
  {
    std::vector<std::vector<int>> succ(n);
    std::vector<int> indeg(n, 0);
    for (const auto& arc : flow.arcs) {
      if (arc.value <= 0.0) continue;
      succ[arc.from].push_back(arc.to);
      indeg[arc.to]++;
    }
    std::vector<int> stack;
    for (int x = 0; x < n; ++x)
      if (indeg[x] == 0) stack.push_back(x);
    int seen = 0;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      ++seen;
      for (int y : succ[x])
        if (--indeg[y] == 0) stack.push_back(y);
    }
    if (seen != n) {
      diag.violated = "acyclicity";
      for (int x = 0; x < n; ++x)
        if (indeg[x] > 0) {
          diag.offending_state = x;
          break;
        }
      return diag;
    }
  }
  diag.ok = true;
  return diag;
}

namespace {

struct FlowGraph {
  std::vector<std::vector<int>> out_arcs;  // per state, arc indices
  std::vector<double> F;                   // total outflow per state
  std::vector<double> log_resist;          // per arc: log f(e) - log c(e)
};

FlowGraph build_flow_graph(const ReversibleChain& chain, const UnitFlow& flow) {
  FlowGraph g;
  const int n = chain.num_states();
  g.out_arcs.assign(n, {});
  g.F.assign(n, 0.0);
  g.log_resist.resize(flow.arcs.size());
  for (std::size_t k = 0; k < flow.arcs.size(); ++k) {
    const auto& arc = flow.arcs[k];
    if (arc.value <= 0.0) continue;
    g.out_arcs[arc.from].push_back(static_cast<int>(k));
    g.F[arc.from] += arc.value;
    double log_c = chain.edges()[arc.edge_index].log_c;
    g.log_resist[k] = std::log(arc.value) - log_c;
  }
  return g;
}

}  // namespace

BkBound bk_lower_bound(const ReversibleChain& chain, const UnitFlow& flow,
                       const BkOptions& opts) {
  auto diag = validate_flow(chain, flow, 1e-9);
  if (!diag.ok)
    throw std::invalid_argument("bk_lower_bound: invalid flow (" +
                                diag.violated + ")");
  FlowGraph g = build_flow_graph(chain, flow);
  const int n = chain.num_states();
  std::vector<char> in_B(n, 0);
  for (int b : flow.sink) in_B[b] = 1;

  BkBound res;
  if (!opts.monte_carlo) {
    // exact enumeration over the acyclic support
    std::vector<double> terms;  // log(P(path) / R(path))
    std::int64_t count = 0;
    bool overflow = false;
    std::vector<double> path_lr;  // log resistances of current path
    std::function<void(int, double)> dfs = [&](int x, double log_prob) {
      if (overflow) return;
      if (in_B[x]) {
        ++count;
        if (count > opts.enumeration_cap) {
          overflow = true;
          return;
        }
        double m = *std::max_element(path_lr.begin(), path_lr.end());
        double s = 0.0;
        for (double lr : path_lr) s += std::exp(lr - m);
        double log_R = m + std::log(s);
        terms.push_back(log_prob - log_R);
        return;
      }
      for (int k : g.out_arcs[x]) {
        const auto& arc = flow.arcs[k];
        double q = arc.value / g.F[x];
        path_lr.push_back(g.log_resist[k]);
        dfs(arc.to, log_prob + std::log(q));
        path_lr.pop_back();
      }
    };
    for (int a : flow.source)
      if (g.F[a] > 0.0) dfs(a, std::log(g.F[a]));
    if (!overflow) {
      res.log_value = logsumexp(terms);
      res.paths = count;
      res.method = "exact_enumeration";
      return res;
    }
    // fall through to Monte Carlo
  }

  // Monte Carlo path sampling with per-replica substreams
  std::vector<int> sources;
  std::vector<double> src_weight;
  double tot = 0.0;
  for (int a : flow.source)
    if (g.F[a] > 0.0) {
      sources.push_back(a);
      src_weight.push_back(g.F[a]);
      tot += g.F[a];
    }
  std::vector<double> log_inv_R(opts.mc_paths);
  for (std::int64_t r = 0; r < opts.mc_paths; ++r) {
    CounterRng rng(opts.seed, 0x10000 + static_cast<std::uint64_t>(r));
    // pick source by weight
    double u = rng.next_double() * tot;
    int x = sources.back();
    double acc = 0.0;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      acc += src_weight[k];
      if (u < acc) {
        x = sources[k];
        break;
      }
    }
    double m = -std::numeric_limits<double>::infinity(), s = 0.0;
    auto add = [&](double lr) {
      if (lr > m) {
        s = s * std::exp(m - lr) + 1.0;
        m = lr;
      } else {
        s += std::exp(lr - m);
      }
    };
    while (!in_B[x]) {
      double v = rng.next_double() * g.F[x];
      double a2 = 0.0;
      int chosen = g.out_arcs[x].back();
      for (int k : g.out_arcs[x]) {
        a2 += flow.arcs[k].value;
        if (v < a2) {
          chosen = k;
          break;
        }
      }
      add(g.log_resist[chosen]);
      x = flow.arcs[chosen].to;
    }
    log_inv_R[r] = -(m + std::log(s));
  }
  double log_mean = logsumexp(log_inv_R) - std::log(double(opts.mc_paths));
  std::vector<double> log_sq(log_inv_R.size());
  for (std::size_t k = 0; k < log_inv_R.size(); ++k)
    log_sq[k] = 2.0 * log_inv_R[k];
  double log_m2 = logsumexp(log_sq) - std::log(double(opts.mc_paths));
  double var_rel = std::exp(log_m2 - 2.0 * log_mean) - 1.0;
  res.log_value = log_mean;
  res.rel_stderr = std::sqrt(std::max(var_rel, 0.0) / double(opts.mc_paths));
  res.paths = opts.mc_paths;
  res.method = "monte_carlo";
  return res;
}

double dirichlet_upper_bound(const ReversibleChain& chain,
                             const std::vector<double>& u,
                             const std::vector<int>& A,
                             const std::vector<int>& B) {
  for (int a : A)
    if (std::abs(u[a] - 1.0) > 0.0)
      throw std::invalid_argument("test function must be 1 on A");
  for (int b : B)
    if (u[b] != 0.0)
      throw std::invalid_argument("test function must be 0 on B");
  for (double v : u)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("test function must take values in [0,1]");
  const double shift = max_log_c(chain);
  double phi = 0.0, comp = 0.0;
  for (const auto& e : chain.edges()) {
    double d = u[e.a] - u[e.b];
    double term = std::exp(e.log_c - shift) * d * d;
    double y = term - comp;
    double t = phi + y;
    comp = (t - phi) - y;
    phi = t;
  }
  if (!(phi > 0.0)) throw std::runtime_error("zero Dirichlet energy");
  return shift + std::log(phi);
}

double green_identity_check(const ReversibleChain& chain, int a,
                            const std::vector<int>& B) {
  const int n = chain.num_states();
  if (n > 2000) throw std::invalid_argument("green_identity_check: chain too big");
  const double shift = max_log_c(chain);
  std::vector<char> in_B(n, 0);
  for (int b : B) in_B[b] = 1;
  if (in_B[a]) throw std::invalid_argument("a must not lie in B");

  // index states of S \ B
  std::vector<int> idx(n, -1), states;
  for (int x = 0; x < n; ++x)
    if (!in_B[x]) {
      idx[x] = static_cast<int>(states.size());
      states.push_back(x);
    }
  const int m = static_cast<int>(states.size());

  // dense (-L_c) on S\B: M_{xy} = sum_z c(x,z) delta_xy - c(x,y)
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (const auto& e : chain.edges()) {
    double c = std::exp(e.log_c - shift);
    int ia = idx[e.a], ib = idx[e.b];
    if (ia >= 0) M(ia, ia) += c;
    if (ib >= 0) M(ib, ib) += c;
    if (ia >= 0 && ib >= 0) {
      M(ia, ib) -= c;
      M(ib, ia) -= c;
    }
  }
  // Green function in chain time units: G = (I - P)^-1 restricted, i.e.
  // solves mu(x) (G row) ... work with conductance form:
  // sum_y c(x,y)(G(x,z)-G(y,z)) = mu(x) delta_{x,z} ... actually
  // E_x[visits to z before B]: (I-P) G(.,z) = delta_z =>
  // conductance form: M g_z = mu(z)_scaled e_z? Use: (I-P)^T has
  // mu-symmetry; solve M g = e_z * mu_scaled(z) gives
  // g(x) = G(x,z) mu(z)/mu(x)... We avoid ambiguity by solving the
  // time-accumulation form directly:
  //   G(x,z) = E_x[# visits to z before tau_B]
  //   satisfies sum_y p(x,y)(G(x,z)-G(y,z)) = delta_{x,z}
  //   i.e. (1/mu(x)) sum_y c(x,y)(G(x,z)-G(y,z)) = delta_{x,z}.
  Eigen::MatrixXd G(m, m);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  for (int z = 0; z < m; ++z) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs[z] = std::exp(chain.log_mu(states[z]) - shift);
    G.col(z) = lu.solve(rhs);
  }

  double worst = 0.0;
  // mu-symmetry: mu(x) G(x,z) = mu(z) G(z,x)
  for (int x = 0; x < m; ++x)
    for (int z = 0; z < m; ++z) {
      double lhs = std::exp(chain.log_mu(states[x]) - shift) * G(x, z);
      double rhs = std::exp(chain.log_mu(states[z]) - shift) * G(z, x);
      double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }

  // single-point identity: G(x,a) = h_{a,B}(x) / e_{a,B}(a)
  PotentialSolution sol = solve_potential(chain, {a}, B);
  double e_a = sol.e_A[0];
  for (int x = 0; x < m; ++x) {
    double lhs = G(x, idx[a]);
    double rhs = sol.h[states[x]] / e_a;
    double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

}  // namespace rfcw
