#include "rfcw/saddleflow.hpp"

#include "rfcw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace rfcw {

namespace {

// geometry helpers working on the active-block coordinates of a SaddleData
struct SaddleFrame {
  const SaddleData& sd;
  const MesoGrid& grid;
  const SystemParams& params;
  std::vector<double> z;       // continuous saddle coords, active blocks
  std::vector<double> w;       // v_check normalized to unit length
  double vnorm = 0.0;

  SaddleFrame(const SaddleData& sd_, const MesoGrid& grid_,
              const SystemParams& params_)
      : sd(sd_), grid(grid_), params(params_), z(sd_.z_star) {
    w = sd.v_check;
    double n2 = 0.0;
    for (double c : w) n2 += c * c;
    vnorm = std::sqrt(n2);
    for (double& c : w) c /= vnorm;
  }

  int dim(int a) const { return sd.active[a]; }
  int na() const { return static_cast<int>(sd.active.size()); }

  std::vector<double> rel(const std::vector<double>& x_full) const {
    std::vector<double> d(na());
    for (int a = 0; a < na(); ++a) d[a] = x_full[dim(a)] - z[a];
    return d;
  }
  double slab_coord(const std::vector<double>& x_full) const {
    double s = 0.0;
    for (int a = 0; a < na(); ++a) s += (x_full[dim(a)] - z[a]) * w[a];
    return s;
  }
  double axis_coord(const std::vector<double>& x_full) const {  // (x-z, v)
    double s = 0.0;
    for (int a = 0; a < na(); ++a) s += (x_full[dim(a)] - z[a]) * sd.v[a];
    return s;
  }
  double tube_dist(const std::vector<double>& x_full) const {
    double s = slab_coord(x_full);
    double d2 = 0.0;
    for (int a = 0; a < na(); ++a) {
      double p = (x_full[dim(a)] - z[a]) - s * w[a];
      d2 += p * p;
    }
    return std::sqrt(d2);
  }
  bool in_box(const std::vector<double>& x_full, double rho) const {
    for (int a = 0; a < na(); ++a)
      if (std::abs(x_full[dim(a)] - z[a]) > rho) return false;
    return true;
  }
  // (y-z, A (y-z)) over active coordinates
  double quad(const std::vector<double>& x_full) const {
    auto d = rel(x_full);
    double q = 0.0;
    for (int a = 0; a < na(); ++a)
      for (int b = 0; b < na(); ++b) q += d[a] * sd.A(a, b) * d[b];
    return q;
  }
  double phi0(int a, const std::vector<double>& x_full) const {
    double g1 = std::abs(sd.gamma_hat1);
    double t = axis_coord(x_full);
    return sd.v[a] *
           std::sqrt(params.beta * g1 / (2.0 * M_PI * params.N)) *
           std::exp(-0.5 * params.beta * params.N * g1 * t * t);
  }
  double surrogate_weight(const std::vector<double>& x_full) const {
    return std::exp(-0.5 * params.beta * params.N * quad(x_full));
  }

  std::vector<double> z_full() const {
    std::vector<double> x(grid.n(), 0.0);
    for (int a = 0; a < na(); ++a) x[dim(a)] = z[a];
    return x;
  }
};

// enumerate grid states whose coordinates lie within the box around z*
template <typename Fn>
void for_each_box_state(const SaddleFrame& fr, double rho, Fn&& fn) {
  const MesoGrid& grid = fr.grid;
  const int na = fr.na();
  std::vector<int> klo(na), khi(na), k(na);
  for (int a = 0; a < na; ++a) {
    int l = fr.dim(a);
    double kc = 0.5 * (fr.z[a] * grid.N() + grid.block_sites(l));
    int half = static_cast<int>(std::floor(rho * grid.N() / 2.0));
    klo[a] = std::max(0, static_cast<int>(std::ceil(kc)) - half);
    khi[a] = std::min(grid.block_sites(l),
                      static_cast<int>(std::floor(kc)) + half);
    if (klo[a] > khi[a]) return;
    k[a] = klo[a];
  }
  std::vector<int> kfull(grid.n(), 0);
  while (true) {
    for (int a = 0; a < na; ++a) kfull[fr.dim(a)] = k[a];
    std::int64_t idx = grid.index(kfull);
    fn(idx);
    int a = na - 1;
    while (a >= 0) {
      if (++k[a] <= khi[a]) break;
      k[a] = klo[a];
      --a;
    }
    if (a < 0) break;
  }
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

}  // namespace

SaddleNeighborhood make_neighborhood(const MesoLandscape& landscape,
                                     const SaddleData& saddle,
                                     const MesoGrid& grid, double rho,
                                     double nu, double nu0) {
  SystemParams params = landscape.params();
  SaddleFrame fr(saddle, grid, params);
  SaddleNeighborhood nb;
  nb.z_star = saddle.z_star;
  nb.rho = rho;
  nb.nu0 = nu0;
  nb.z_index = grid.nearest(fr.z_full());

  double Fz = landscape.free_energy(fr.z_full());
  for (int attempt = 0; attempt < 6; ++attempt) {
    double excess = std::numeric_limits<double>::infinity();
    bool any = false;
    for_each_box_state(fr, rho, [&](std::int64_t idx) {
      auto x = grid.point(idx);
      if (std::abs(fr.slab_coord(x)) >= nu * rho) return;
      // side boundary: outermost grid layer of the box in some direction
      bool edge = false;
      for (int a = 0; a < fr.na(); ++a)
        if (std::abs(x[fr.dim(a)] - fr.z[a]) > rho - 2.0 / params.N)
          edge = true;
      if (!edge) return;
      any = true;
      excess = std::min(excess, landscape.free_energy(x) - Fz);
    });
    if (!any || excess > 0.0) {
      // no side boundary at all (the slab never reaches the box faces,
      // always the case in one block) counts as vacuously satisfied
      nb.nu = nu;
      nb.boundary_excess = excess;
      return nb;
    }
    nu *= 0.5;
  }
  throw std::runtime_error(
      "make_neighborhood: side boundary never clears the saddle level");
}

double flow_box_radius(const SaddleData& saddle, const SystemParams& params,
                       const BarrierSpec& barrier, double widths) {
  double width =
      1.0 / std::sqrt(params.beta * params.N * std::abs(saddle.gamma_hat1));
  double dist = std::abs(saddle.z_star_total - barrier.start.m_star);
  for (const auto& cp : barrier.deeper)
    dist = std::min(dist, std::abs(saddle.z_star_total - cp.m_star));
  return std::min(widths * width, 0.45 * dist);
}

double test_function(const SaddleData& saddle, const SystemParams& params,
                     const std::vector<double>& x,
                     const std::vector<double>& z_star) {
  double s = 0.0;
  for (std::size_t a = 0; a < saddle.active.size(); ++a)
    s += saddle.v[a] * (x[saddle.active[a]] - z_star[a]);
  return normal_cdf(s * std::sqrt(params.beta * params.N *
                                  std::abs(saddle.gamma_hat1)));
}

double harmonic_residual(const SaddleData& saddle,
                         const SaddleNeighborhood& nb, const MesoGrid& grid,
                         const SystemParams& params) {
  SaddleFrame fr(saddle, grid, params);
  const double g1 = std::abs(saddle.gamma_hat1);
  double rv = 0.0;
  for (int a = 0; a < fr.na(); ++a) rv += saddle.r[a] * saddle.v[a];

  double worst = 0.0;
  for_each_box_state(fr, nb.rho, [&](std::int64_t idx) {
    auto x = grid.point(idx);
    double gx = test_function(saddle, params, x, fr.z);
    auto d = fr.rel(x);
    double L = 0.0;
    for (int a = 0; a < fr.na(); ++a) {
      int l = fr.dim(a);
      std::int64_t up = grid.step(idx, l, +1);
      std::int64_t dn = grid.step(idx, l, -1);
      if (up < 0 || dn < 0) return;  // skip states touching the grid edge
      auto xu = grid.point(up);
      auto xd = grid.point(dn);
      // constant up-rate r_a; down-rate with the linearized drift
      // exp(2 beta (A d)_a), the asymptotic detailed-balance ratio of the
      // Gaussian surrogate (lattice step 2/N)
      double Ad = 0.0;
      for (int b = 0; b < fr.na(); ++b) Ad += fr.sd.A(a, b) * d[b];
      double rd = std::exp(2.0 * params.beta * Ad);
      L += saddle.r[a] * (test_function(saddle, params, xu, fr.z) - gx);
      L += saddle.r[a] * rd * (test_function(saddle, params, xd, fr.z) - gx);
    }
    double t = fr.axis_coord(x);
    double env = std::sqrt(params.beta * g1 / (2.0 * M_PI * params.N)) *
                 std::exp(-0.5 * params.beta * params.N * g1 * t * t) * rv;
    worst = std::max(worst, std::abs(L) / env);
  });
  return worst;
}

std::pair<std::int64_t, std::int64_t> well_states(
    const MesoLandscape& landscape, const MesoGrid& grid,
    const BarrierSpec& barrier) {
  // deeper minimum on the far side of the saddle, nearest in magnetization
  const double zs = barrier.saddle.m_star;
  const double m0 = barrier.start.m_star;
  const CriticalPoint* target = nullptr;
  for (const auto& d : barrier.deeper) {
    bool opposite = (m0 < zs && d.m_star > zs) || (m0 > zs && d.m_star < zs);
    if (!opposite) continue;
    if (!target ||
        std::abs(d.m_star - zs) < std::abs(target->m_star - zs))
      target = &d;
  }
  if (!target)
    throw std::runtime_error("well_states: no deeper minimum across the saddle");
  std::int64_t a = grid.nearest(landscape.min_energy_curve(m0));
  std::int64_t b = grid.nearest(landscape.min_energy_curve(target->m_star));
  return {a, b};
}

namespace {

struct EdgeLookup {
  std::unordered_map<std::int64_t, int> map;
  int n;
  EdgeLookup(const LumpedChain& lumped) : n(lumped.grid.n()) {
    const auto& edges = lumped.chain.edges();
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      std::int64_t diff = edges[e].b - edges[e].a;
      for (int l = 0; l < n; ++l)
        if (diff == lumped.grid.stride(l)) {
          map[static_cast<std::int64_t>(edges[e].a) * n + l] = e;
          break;
        }
    }
  }
  int at(std::int64_t state, int l) const {
    auto it = map.find(state * n + l);
    if (it == map.end())
      throw std::runtime_error("saddle flow: missing chain edge");
    return it->second;
  }
};

// Greedy coordinate-monotone path along the minimal-energy curve.  Walks from
// `from` down (dir=-1) or up (dir=+1) in total magnetization until reaching
// `goal`, always staying on the `goal` side of the curve coordinate bound.
class CurveRouter {
 public:
  CurveRouter(const MesoLandscape& landscape, const MesoGrid& grid)
      : landscape_(landscape), grid_(grid) {}

  // visit(state, l) for every traversed up-edge (state -> state + e_l)
  template <typename Fn>
  void route(std::int64_t from, std::int64_t goal, int dir, Fn&& visit) {
    auto k = grid_.coords(from);
    auto kg = grid_.coords(goal);
    int M = 0, Mg = 0;
    for (int l = 0; l < grid_.n(); ++l) {
      M += k[l];
      Mg += kg[l];
    }
    if (dir * (Mg - M) < 0)
      throw std::runtime_error("saddle flow: wells on the wrong side");
    for (int l = 0; l < grid_.n(); ++l)
      if (dir * (kg[l] - k[l]) < 0)
        throw std::runtime_error("saddle flow: no monotone route to the well");
    std::int64_t cur = from;
    while (M != Mg) {
      const auto& cx = curve_at(M + dir);
      int best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < grid_.n(); ++l) {
        if (dir * (kg[l] - k[l]) <= 0) continue;  // already at the bound
        double score = dir * (cx[l] - grid_.x_of(l, k[l]));
        if (score > best_score) {
          best_score = score;
          best = l;
        }
      }
      if (best < 0)
        throw std::runtime_error("saddle flow: routing dead end");
      if (dir > 0) {
        visit(cur, best);
        cur += grid_.stride(best);
      } else {
        cur -= grid_.stride(best);
        visit(cur, best);
      }
      k[best] += dir;
      M += dir;
    }
  }

 private:
  const std::vector<double>& curve_at(int M) {
    auto it = cache_.find(M);
    if (it != cache_.end()) return it->second;
    double m = (2.0 * M - grid_.N()) / grid_.N();
    return cache_.emplace(M, landscape_.min_energy_curve(m)).first->second;
  }
  const MesoLandscape& landscape_;
  const MesoGrid& grid_;
  std::unordered_map<int, std::vector<double>> cache_;
};

}  // namespace

SaddleFlowResult build_saddle_flow(const MesoLandscape& landscape,
                                   const SaddleData& saddle,
                                   const SaddleNeighborhood& nb,
                                   const LumpedChain& lumped,
                                   const BarrierSpec& barrier) {
  const SystemParams& params = landscape.params();
  const MesoGrid& grid = lumped.grid;
  SaddleFrame fr(saddle, grid, params);
  const double rho = nb.rho;

  auto [a_state, b_state] = well_states(landscape, grid, barrier);
  // the sweep below runs in increasing magnetization, so put the low well
  // first regardless of which one is the starting well
  if (grid.magnetization(a_state) > grid.magnetization(b_state))
    std::swap(a_state, b_state);

  // slab states around the saddle, sorted by total magnetization layer
  std::unordered_set<std::int64_t> S;
  std::vector<std::int64_t> order;
  for_each_box_state(fr, rho, [&](std::int64_t idx) {
    if (std::abs(fr.slab_coord(grid.point(idx))) < nb.nu * rho) {
      S.insert(idx);
      order.push_back(idx);
    }
  });
  if (S.empty()) throw std::runtime_error("saddle flow: empty neighborhood");
  auto layer = [&](std::int64_t idx) {
    int M = 0;
    for (int l = 0; l < grid.n(); ++l)
      M += static_cast<int>(idx / grid.stride(l) % (grid.block_sites(l) + 1));
    return M;
  };
  std::sort(order.begin(), order.end(),
            [&](std::int64_t a, std::int64_t b) { return layer(a) < layer(b); });

  auto in_tube = [&](const std::vector<double>& x) {
    return fr.tube_dist(x) < nb.nu0 * rho;
  };
  auto base_flow = [&](int a, const std::vector<double>& x) {
    if (!in_tube(x)) return 0.0;
    return fr.surrogate_weight(x) * saddle.r[a] * fr.phi0(a, x);
  };

  std::unordered_map<std::int64_t, double> flowmap;  // key: state*n + l
  std::unordered_map<std::int64_t, double> inflow, src_req, exit_req;
  const int n = grid.n();
  SaddleFlowResult res;
  res.a_state = a_state;
  res.b_state = b_state;

  // injection across the A-side slab boundary
  for (std::int64_t idx : order) {
    for (int a = 0; a < fr.na(); ++a) {
      int l = fr.dim(a);
      std::int64_t y = grid.step(idx, l, -1);
      if (y < 0 || S.count(y)) continue;
      auto xy = grid.point(y);
      if (fr.slab_coord(xy) > -nb.nu * rho) continue;
      if (!fr.in_box(xy, rho)) continue;
      double wgt = base_flow(a, xy);
      if (wgt <= 0.0) continue;
      flowmap[y * n + l] += wgt;
      inflow[idx] += wgt;
      src_req[y] += wgt;
    }
  }
  if (src_req.empty())
    throw std::runtime_error("saddle flow: no entering flux (tube too narrow)");

  // Kirchhoff sweep in increasing magnetization
  for (std::int64_t idx : order) {
    double In = 0.0;
    if (auto it = inflow.find(idx); it != inflow.end()) In = it->second;
    auto x = grid.point(idx);

    std::vector<int> allowed;  // active-block indices
    std::vector<char> is_exit;
    for (int a = 0; a < fr.na(); ++a) {
      int l = fr.dim(a);
      std::int64_t up = grid.step(idx, l, +1);
      if (up < 0) continue;
      if (S.count(up)) {
        allowed.push_back(a);
        is_exit.push_back(0);
      } else if (fr.slab_coord(grid.point(up)) >= nb.nu * rho) {
        allowed.push_back(a);
        is_exit.push_back(1);
      }
    }
    if (allowed.empty()) {
      if (In <= 0.0) continue;
      // forced side exit toward the strongest drift direction
      int best = 0;
      for (int a = 1; a < fr.na(); ++a)
        if (saddle.v_check[a] > saddle.v_check[best]) best = a;
      std::int64_t up = grid.step(idx, fr.dim(best), +1);
      if (up < 0) throw std::runtime_error("saddle flow: trapped at grid edge");
      flowmap[idx * n + fr.dim(best)] += In;
      exit_req[up] += In;
      res.side_exit_mass += In;
      continue;
    }

    double qsum = 0.0, base_sum = 0.0;
    std::vector<double> base(allowed.size());
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      qsum += saddle.v_check[allowed[j]];
      base[j] = base_flow(allowed[j], x);
      base_sum += base[j];
    }
    double D = In - base_sum;
    std::vector<double> out(allowed.size());
    double deficit = 0.0;
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      out[j] = base[j] + saddle.v_check[allowed[j]] / qsum * D;
      if (out[j] < 0.0) {
        deficit += -out[j];
        out[j] = 0.0;
      }
    }
    if (deficit > 0.0) {
      res.clipped_mass += deficit;
      // take the surplus back from directions in decreasing drift order
      std::vector<std::size_t> by_drift(allowed.size());
      for (std::size_t j = 0; j < by_drift.size(); ++j) by_drift[j] = j;
      std::sort(by_drift.begin(), by_drift.end(), [&](std::size_t a, std::size_t b) {
        return saddle.v_check[allowed[a]] > saddle.v_check[allowed[b]];
      });
      for (std::size_t j : by_drift) {
        double take = std::min(out[j], deficit);
        out[j] -= take;
        deficit -= take;
        if (deficit <= 0.0) break;
      }
    }
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      if (out[j] <= 0.0) continue;
      int l = fr.dim(allowed[j]);
      std::int64_t up = idx + grid.stride(l);
      flowmap[idx * n + l] += out[j];
      if (is_exit[j])
        exit_req[up] += out[j];
      else
        inflow[up] += out[j];
    }
  }

  // outer monotone paths into the wells
  CurveRouter router(landscape, grid);
  for (const auto& [y, wgt] : src_req)
    router.route(y, a_state, -1, [&](std::int64_t s, int l) {
      flowmap[s * n + l] += wgt;
    });
  for (const auto& [y, wgt] : exit_req)
    router.route(y, b_state, +1, [&](std::int64_t s, int l) {
      flowmap[s * n + l] += wgt;
    });

  double total = 0.0;
  for (const auto& [y, wgt] : src_req) total += wgt;
  if (!(total > 0.0)) throw std::runtime_error("saddle flow: zero total flux");

  EdgeLookup lookup(lumped);
  res.flow.source = {static_cast<int>(a_state)};
  res.flow.sink = {static_cast<int>(b_state)};
  for (const auto& [key, wgt] : flowmap) {
    if (wgt <= 0.0) continue;
    std::int64_t state = key / n;
    int l = static_cast<int>(key % n);
    res.flow.arcs.push_back({static_cast<int>(state),
                             static_cast<int>(state + grid.stride(l)),
                             lookup.at(state, l), wgt / total});
  }
  res.clipped_mass /= total;
  res.side_exit_mass /= total;
  return res;
}

UpperBoundResult upper_bound_via_g(const SaddleData& saddle,
                                   const SaddleNeighborhood& nb,
                                   const MesoLandscape& landscape,
                                   const LumpedChain& lumped,
                                   const BarrierSpec& barrier) {
  const SystemParams& params = landscape.params();
  const MesoGrid& grid = lumped.grid;
  SaddleFrame fr(saddle, grid, params);
  auto [a_state, b_state] = well_states(landscape, grid, barrier);
  // u is 0 on the negative side of the principal axis, so order by
  // magnetization here
  if (grid.magnetization(a_state) > grid.magnetization(b_state))
    std::swap(a_state, b_state);

  // plateau extension of g: the Gaussian profile inside the saddle box,
  // 0/1 by the sign of the principal coordinate everywhere else (the side
  // boundary sits strictly above the saddle level, so the jump there is
  // exponentially negligible in the Dirichlet form).  The box must span a
  // few standard deviations of the Gaussian profile or the clipped jump at
  // the faces dominates the energy, so widen it beyond nb.rho if needed.
  double g1 = std::abs(saddle.gamma_hat1);
  double rho_u =
      std::max(nb.rho, 3.5 / std::sqrt(params.beta * params.N * g1));
  std::vector<double> u(grid.size());
  for (std::int64_t idx = 0; idx < grid.size(); ++idx) {
    auto x = grid.point(idx);
    double wc = fr.axis_coord(x);
    if (std::abs(wc) < rho_u && fr.in_box(x, rho_u))
      u[idx] = test_function(saddle, params, x, fr.z);
    else
      u[idx] = wc < 0.0 ? 0.0 : 1.0;
  }
  u[a_state] = 0.0;
  u[b_state] = 1.0;

  UpperBoundResult res;
  res.a_state = a_state;
  res.b_state = b_state;
  res.log_numeric =
      dirichlet_upper_bound(lumped.chain, u,
                            {static_cast<int>(b_state)},
                            {static_cast<int>(a_state)});

  // the log(4) is the lattice constant of the magnetization step 2/N; it is
  // the same universal factor that appears in the exact/formula capacity
  // ratio, and is independent of the number of blocks
  double lf = std::log(4.0) +
              lumped.chain.log_mu(static_cast<int>(nb.z_index)) +
              std::log(params.beta * g1 / (2.0 * M_PI * params.N)) +
              0.5 * fr.na() *
                  std::log(M_PI * params.N / (2.0 * params.beta));
  for (int a = 0; a < fr.na(); ++a)
    lf += 0.5 * (std::log(saddle.r[a]) - std::log(std::abs(saddle.gamma_hat[a])));
  res.log_closed_form = lf;
  return res;
}

}  // namespace rfcw
