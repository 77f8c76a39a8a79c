#include "rfcw/meso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rfcw {

namespace {

double ln_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

double lchoose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::vector<int> Partition::active() const {
  std::vector<int> out;
  for (int l = 0; l < n; ++l)
    if (rho[l] > 0.0) out.push_back(l);
  return out;
}

Partition build_partition(const RandomField& field, int n) {
  if (n < 1) throw std::invalid_argument("build_partition: n < 1");
  const int N = field.size();
  const double lo = field.dist.support_lo();
  const double hi = field.dist.support_hi();
  Partition part;
  part.n = n;
  part.epsilon = (hi - lo) / n;
  part.blocks.assign(n, {});
  part.rho.assign(n, 0.0);
  part.hbar.assign(n, 0.0);
  part.htilde.assign(N, 0.0);
  for (int l = 0; l < n; ++l)
    part.intervals.emplace_back(lo + l * part.epsilon, lo + (l + 1) * part.epsilon);
  for (int i = 0; i < N; ++i) {
    int l = part.epsilon > 0.0
                ? std::min(n - 1, static_cast<int>((field.h[i] - lo) / part.epsilon))
                : 0;
    // guard against rounding on interval edges
    l = std::clamp(l, 0, n - 1);
    part.blocks[l].push_back(i);
  }
  for (int l = 0; l < n; ++l) {
    if (part.blocks[l].empty()) continue;
    part.rho[l] = double(part.blocks[l].size()) / N;
    double s = 0.0;
    for (int i : part.blocks[l]) s += field.h[i];
    part.hbar[l] = s / part.blocks[l].size();
    for (int i : part.blocks[l]) {
      part.htilde[i] = field.h[i] - part.hbar[l];
      part.max_residual = std::max(part.max_residual, std::abs(part.htilde[i]));
    }
  }
  return part;
}

MesoGrid::MesoGrid(const Partition& part, int N)
    : N_(N), rho_(part.rho), hbar_(part.hbar) {
  sizes_.resize(part.n);
  for (int l = 0; l < part.n; ++l)
    sizes_[l] = static_cast<int>(part.blocks[l].size()) + 1;
  strides_.resize(part.n);
  total_ = 1;
  for (int l = part.n - 1; l >= 0; --l) {
    strides_[l] = total_;
    total_ *= sizes_[l];
  }
}

std::int64_t MesoGrid::index(const std::vector<int>& k) const {
  std::int64_t idx = 0;
  for (int l = 0; l < n(); ++l) {
    if (k[l] < 0 || k[l] >= sizes_[l])
      throw std::out_of_range("MesoGrid::index: coordinate off grid");
    idx += k[l] * strides_[l];
  }
  return idx;
}

std::vector<int> MesoGrid::coords(std::int64_t idx) const {
  std::vector<int> k(n());
  for (int l = 0; l < n(); ++l) {
    k[l] = static_cast<int>(idx / strides_[l]);
    idx %= strides_[l];
  }
  return k;
}

std::vector<double> MesoGrid::point(std::int64_t idx) const {
  auto k = coords(idx);
  std::vector<double> x(n());
  for (int l = 0; l < n(); ++l) x[l] = x_of(l, k[l]);
  return x;
}

double MesoGrid::magnetization(std::int64_t idx) const {
  double m = 0.0;
  auto k = coords(idx);
  for (int l = 0; l < n(); ++l) m += x_of(l, k[l]);
  return m;
}

std::int64_t MesoGrid::step(std::int64_t idx, int l, int dir) const {
  int kl = static_cast<int>(idx / strides_[l] % sizes_[l]);
  int kn = kl + dir;
  if (kn < 0 || kn >= sizes_[l]) return -1;
  return idx + static_cast<std::int64_t>(dir) * strides_[l];
}

std::int64_t MesoGrid::nearest(const std::vector<double>& x) const {
  std::vector<int> k(n());
  for (int l = 0; l < n(); ++l) {
    double kr = 0.5 * (x[l] * N_ + block_sites(l));
    k[l] = std::clamp(static_cast<int>(std::lround(kr)), 0, sizes_[l] - 1);
  }
  return index(k);
}

double meso_energy(const Partition& part, const std::vector<double>& x) {
  double m = 0.0, field = 0.0;
  for (int l = 0; l < part.n; ++l) {
    m += x[l];
    field += x[l] * part.hbar[l];
  }
  return 0.5 * m * m + field;
}

MesoLandscape::MesoLandscape(SystemParams params, RandomField field,
                             Partition part)
    : params_(std::move(params)),
      field_(std::move(field)),
      part_(std::move(part)) {
  params_.validate();
  if (field_.size() != params_.N)
    throw std::invalid_argument("field length != N");
  beta_htilde_.resize(part_.n);
  residual_bound_.assign(part_.n, 0.0);
  for (int l = 0; l < part_.n; ++l) {
    for (int i : part_.blocks[l]) {
      double bh = params_.beta * part_.htilde[i];
      beta_htilde_[l].push_back(bh);
      residual_bound_[l] = std::max(residual_bound_[l], std::abs(bh));
    }
  }
}

LogMgf MesoLandscape::block_log_mgf(int l, double t) const {
  const auto& bh = beta_htilde_[l];
  if (bh.empty()) throw std::invalid_argument("block_log_mgf: empty block");
  double u = 0.0, d1 = 0.0, d2 = 0.0;
  for (double b : bh) {
    double x = t + b;
    double th = std::tanh(x);
    u += ln_cosh(x);
    d1 += th;
    d2 += 1.0 - th * th;
  }
  double inv = 1.0 / bh.size();
  return {u * inv, d1 * inv, d2 * inv};
}

LegendreResult MesoLandscape::block_legendre(int l, double y) const {
  if (!(std::abs(y) < 1.0))
    throw std::domain_error("block_legendre: |ratio| >= 1");
  double at = std::atanh(y);
  double lo = at - residual_bound_[l] - 1e-12;
  double hi = at + residual_bound_[l] + 1e-12;
  double t = std::clamp(at, lo, hi);
  for (int it = 0; it < 200; ++it) {
    LogMgf g = block_log_mgf(l, t);
    double f = g.deriv - y;
    if (f > 0)
      hi = t;
    else
      lo = t;
    double tn = t - f / std::max(g.deriv2, 1e-300);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) < 1e-15 * (1.0 + std::abs(t))) {
      t = tn;
      break;
    }
    t = tn;
  }
  LogMgf g = block_log_mgf(l, t);
  return {t * y - g.value, t, 1.0 / g.deriv2};
}

double MesoLandscape::free_energy(const std::vector<double>& x) const {
  double rate = 0.0;
  for (int l = 0; l < part_.n; ++l) {
    if (part_.rho[l] == 0.0) {
      if (x[l] != 0.0)
        throw std::domain_error("free_energy: mass in an empty block");
      continue;
    }
    double y = x[l] / part_.rho[l];
    rate += part_.rho[l] * block_legendre(l, y).rate;
  }
  return -meso_energy(part_, x) + rate / params_.beta;
}

std::vector<double> MesoLandscape::min_energy_curve(double m) const {
  if (!(std::abs(m) < 1.0))
    throw std::domain_error("min_energy_curve: |m| >= 1");
  const double beta = params_.beta;
  const int N = params_.N;
  auto g = [&](double a) {
    double s = 0.0;
    for (double h : field_.h) s += std::tanh(beta * (m + a + h));
    return s / N - m;
  };
  double supp = field_.dist.support_bound();
  double L = 20.0 / beta + supp + std::abs(m) + 2.0;
  double lo = -L, hi = L;
  while (g(lo) > 0.0) lo *= 2.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double a = 0.5 * (lo + hi);
  std::vector<double> x(part_.n, 0.0);
  for (int l = 0; l < part_.n; ++l) {
    double s = 0.0;
    for (int i : part_.blocks[l]) s += std::tanh(beta * (m + a + field_.h[i]));
    x[l] = s / N;
  }
  return x;
}

LumpedChain lumped_chain(const Partition& part, const SystemParams& params,
                         bool with_labels) {
  params.validate();
  const int N = params.N;
  const double beta = params.beta;
  MesoGrid grid(part, N);
  const std::int64_t S = grid.size();
  if (S > 50'000'000) throw std::invalid_argument("lumped_chain: grid too big");

  ReversibleChain chain(static_cast<int>(S));
  const int n = grid.n();
  std::vector<int> k(n, 0);
  for (std::int64_t idx = 0; idx < S; ++idx) {
    double m = 0.0, lbin = 0.0;
    std::vector<double> x(n);
    for (int l = 0; l < n; ++l) {
      x[l] = grid.x_of(l, k[l]);
      m += x[l];
      lbin += lchoose(grid.block_sites(l), k[l]);
    }
    double E = meso_energy(part, x);
    double log_q = beta * N * E + lbin;
    chain.set_log_mu(static_cast<int>(idx), log_q);
    // up-moves only; reversibility supplies the down-rates
    for (int l = 0; l < n; ++l) {
      int sites = grid.block_sites(l);
      int minus = sites - k[l];
      if (minus == 0) continue;
      double dH = -2.0 * (m + 1.0 / N + part.hbar[l]);
      double log_p = std::log(double(minus) / N) - beta * std::max(dH, 0.0);
      chain.add_edge(static_cast<int>(idx),
                     static_cast<int>(idx + grid.stride(l)), log_q + log_p);
    }
    if (with_labels) {
      std::ostringstream os;
      for (int l = 0; l < n; ++l) os << (l ? "," : "") << k[l];
      if (chain.state_labels.empty()) chain.state_labels.resize(S);
      chain.state_labels[idx] = os.str();
    }
    // advance row-major coordinates
    for (int l = n - 1; l >= 0; --l) {
      if (++k[l] <= grid.block_sites(l)) break;
      k[l] = 0;
    }
  }
  return {std::move(chain), std::move(grid), part.block_constant()};
}

std::vector<double> secular_roots(const std::vector<double>& r,
                                  const std::vector<double>& d) {
  const int n = static_cast<int>(r.size());
  if (n == 0) return {};
  // merge coincident poles
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return d[a] < d[b]; });
  std::vector<double> poles, weights;
  std::vector<int> mult;
  for (int j : order) {
    double scale = std::max(std::abs(d[j]), 1e-300);
    if (!poles.empty() && std::abs(d[j] - poles.back()) <= 1e-12 * scale) {
      weights.back() += r[j];
      mult.back()++;
    } else {
      poles.push_back(d[j]);
      weights.push_back(r[j]);
      mult.push_back(1);
    }
  }
  const int p = static_cast<int>(poles.size());
  auto s = [&](double g) {
    double acc = -1.0;
    for (int j = 0; j < p; ++j) acc += weights[j] / (poles[j] - g);
    return acc;
  };
  auto bisect = [&](double lo, double hi, bool lo_neg) {
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if ((s(mid) < 0.0) == lo_neg)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> roots;
  double total_w = std::accumulate(weights.begin(), weights.end(), 0.0);
  // one root strictly below the smallest pole (s: -1 -> +inf)
  roots.push_back(bisect(poles[0] - total_w - 1.0, poles[0], true));
  // one root in each gap (s: -inf -> +inf)
  for (int j = 0; j + 1 < p; ++j)
    roots.push_back(bisect(poles[j], poles[j + 1], true));
  // coincident poles are eigenvalues with multiplicity count-1
  for (int j = 0; j < p; ++j)
    for (int c = 1; c < mult[j]; ++c) roots.push_back(poles[j]);
  std::sort(roots.begin(), roots.end());
  return roots;
}

SaddleData meso_saddle(const CriticalPoint& z_star_1d, const Partition& part,
                       const SystemParams& params, const RandomField& field) {
  if (z_star_1d.is_minimum)
    throw std::invalid_argument("meso_saddle: expected a maximum of F");
  const double beta = params.beta;
  const int N = params.N;
  const double z = z_star_1d.m_star;

  SaddleData sd;
  sd.active = part.active();
  const int n = static_cast<int>(sd.active.size());
  sd.z_star.resize(n);
  sd.lambda_hat.resize(n);
  sd.r.resize(n);

  double total_t2 = 0.0;
  for (int a = 0; a < n; ++a) {
    int l = sd.active[a];
    double sum_t = 0.0, sum_t2 = 0.0;
    for (int i : part.blocks[l]) {
      double th = std::tanh(beta * (z + field.h[i]));
      sum_t += th;
      sum_t2 += 1.0 - th * th;
    }
    sd.z_star[a] = sum_t / N;
    sd.lambda_hat[a] = 1.0 / (beta / N * sum_t2);
    // Metropolis suppression of the up-move at the saddle, matching the
    // lumped-chain rates (Delta H = -2(z* + hbar) to leading order)
    sd.r[a] = 0.5 * (part.rho[l] - sd.z_star[a]) *
              std::exp(-2.0 * beta * std::max(-(z + part.hbar[l]), 0.0));
    total_t2 += sum_t2;
  }
  sd.z_star_total = std::accumulate(sd.z_star.begin(), sd.z_star.end(), 0.0);
  sd.condition_value = beta / N * total_t2;
  if (!(sd.condition_value > 1.0))
    throw std::runtime_error("meso_saddle: not a saddle (index condition fails)");

  sd.A = Eigen::MatrixXd::Constant(n, n, -1.0);
  for (int a = 0; a < n; ++a) sd.A(a, a) += sd.lambda_hat[a];
  sd.B.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      sd.B(a, b) = std::sqrt(sd.r[a]) * sd.A(a, b) * std::sqrt(sd.r[b]);

  std::vector<double> d(n);
  for (int a = 0; a < n; ++a) d[a] = sd.r[a] * sd.lambda_hat[a];
  sd.gamma_hat = secular_roots(sd.r, d);
  sd.gamma_hat1 = sd.gamma_hat.front();
  if (!(sd.gamma_hat1 < 0.0))
    throw std::runtime_error("meso_saddle: no negative eigenvalue");
  for (std::size_t j = 1; j < sd.gamma_hat.size(); ++j)
    if (!(sd.gamma_hat[j] > 0.0))
      throw std::runtime_error("meso_saddle: more than one non-positive eigenvalue");

  // principal eigenvector pair from the resolvent representation
  sd.v.resize(n);
  sd.v_check.resize(n);
  double norm = 0.0;
  for (int a = 0; a < n; ++a) {
    double phi = d[a] - sd.gamma_hat1;
    norm += sd.r[a] / (phi * phi);
  }
  norm = 1.0 / std::sqrt(norm);
  for (int a = 0; a < n; ++a) {
    sd.v[a] = norm / (d[a] - sd.gamma_hat1);
    sd.v_check[a] = sd.r[a] * sd.v[a];
  }

  // cross-check the secular roots against a dense eigendecomposition
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.B);
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    worst = std::max(worst, std::abs(es.eigenvalues()[a] - sd.gamma_hat[a]));
  sd.dense_check = worst / scale;
  if (sd.dense_check > 1e-8)
    throw std::runtime_error("meso_saddle: secular/dense eigenvalue mismatch");
  return sd;
}

}  // namespace rfcw
