#include "rfcw/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rfcw {

namespace {
constexpr double kRootTol = 1e-13;
constexpr int kScanPoints = 4000;
constexpr double kDegenerateTol = 1e-8;
}  // namespace

Landscape1D::Landscape1D(SystemParams params, RandomField field)
    : params_(std::move(params)), field_(std::move(field)) {
  params_.validate();
  if (field_.size() != params_.N)
    throw std::invalid_argument("field length != N");
  beta_h_.resize(field_.h.size());
  for (std::size_t i = 0; i < beta_h_.size(); ++i)
    beta_h_[i] = params_.beta * field_.h[i];
}

LogMgf Landscape1D::log_mgf(double t) const {
  const double invN = 1.0 / params_.N;
  double u = 0.0, d1 = 0.0, d2 = 0.0;
  for (double bh : beta_h_) {
    double x = t + bh;
    double th = std::tanh(x);
    // ln cosh(x) computed stably for large |x|
    double lc = std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) -
                std::log(2.0);
    u += lc;
    d1 += th;
    d2 += 1.0 - th * th;
  }
  return {u * invN, d1 * invN, d2 * invN};
}

LegendreResult Landscape1D::legendre(double m) const {
  if (!(std::abs(m) < 1.0)) throw std::domain_error("legendre: |m| >= 1");
  // Bracket from arctanh(m) +- beta*support bound, then safeguarded Newton.
  double supp = params_.beta * field_.dist.support_bound();
  double at = std::atanh(m);
  double lo = at - supp - 1e-12, hi = at + supp + 1e-12;
  double t = std::clamp(at, lo, hi);
  for (int it = 0; it < 200; ++it) {
    LogMgf g = log_mgf(t);
    double f = g.deriv - m;
    if (f > 0)
      hi = t;
    else
      lo = t;
    double step = f / std::max(g.deriv2, 1e-300);
    double tn = t - step;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) < 1e-15 * (1.0 + std::abs(t))) {
      t = tn;
      break;
    }
    t = tn;
  }
  LogMgf g = log_mgf(t);
  return {t * m - g.value, t, 1.0 / g.deriv2};
}

double Landscape1D::free_energy(double m) const {
  double clampm = 1.0 - 2.0 / params_.N;
  if (!(std::abs(m) < 1.0)) throw std::domain_error("free_energy: |m| >= 1");
  m = std::clamp(m, -clampm, clampm);
  LegendreResult lr = legendre(m);
  return -0.5 * m * m + lr.rate / params_.beta;
}

CriticalPoint Landscape1D::classify(double m) const {
  CriticalPoint cp;
  cp.m_star = m;
  LogMgf g = log_mgf(params_.beta * m);
  cp.susceptibility = params_.beta * g.deriv2;
  if (std::abs(cp.susceptibility - 1.0) < kDegenerateTol)
    throw std::runtime_error(
        "second-order transition: near-degenerate critical point");
  cp.is_minimum = cp.susceptibility < 1.0;
  cp.curvature_a = -1.0 + 1.0 / cp.susceptibility;
  // closed form at a critical point: m^2/2 - (1/(beta N)) sum ln cosh
  cp.F_value = 0.5 * m * m - g.value / params_.beta;
  return cp;
}

std::vector<CriticalPoint> Landscape1D::critical_points() const {
  auto phi = [&](double m) { return m - log_mgf(params_.beta * m).deriv; };
  const double a = -1.0 + 1e-6, b = 1.0 - 1e-6;
  std::vector<double> roots;
  double prev_m = a, prev_f = phi(a);
  for (int k = 1; k <= kScanPoints; ++k) {
    double m = a + (b - a) * k / kScanPoints;
    double f = phi(m);
    if ((prev_f < 0.0 && f >= 0.0) || (prev_f > 0.0 && f <= 0.0)) {
      double lo = prev_m, hi = m, flo = prev_f;
      while (hi - lo > kRootTol) {
        double mid = 0.5 * (lo + hi);
        double fm = phi(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_m = m;
    prev_f = f;
  }
  std::vector<CriticalPoint> cps;
  cps.reserve(roots.size());
  for (double r : roots) cps.push_back(classify(r));
  return cps;
}

double Landscape1D::tanh2_mean(double m, bool empirical) const {
  const double beta = params_.beta;
  if (empirical) {
    double s = 0.0;
    for (double h : field_.h) {
      double th = std::tanh(beta * (m + h));
      s += 1.0 - th * th;
    }
    return s / field_.size();
  }
  return field_.dist.expect([&](double h) {
    double th = std::tanh(beta * (m + h));
    return 1.0 - th * th;
  });
}

double Landscape1D::log_gibbs_point_asymptotic(const CriticalPoint& cp,
                                               bool empirical) const {
  // relative to the counting measure on spin configurations, hence the
  // 2^N from the binomial mass around m*
  const double N = params_.N;
  double mean = tanh2_mean(cp.m_star, empirical);
  return N * std::log(2.0) - params_.beta * N * cp.F_value -
         0.5 * std::log(0.5 * N * M_PI * std::abs(mean));
}

double Landscape1D::gibbs_point_asymptotic(const CriticalPoint& cp,
                                           bool empirical) const {
  return std::exp(log_gibbs_point_asymptotic(cp, empirical));
}

BarrierSpec Landscape1D::barrier(const CriticalPoint& from_min,
                                 double tie_tolerance) const {
  if (!from_min.is_minimum)
    throw std::invalid_argument("barrier: start must be a minimum");
  auto cps = critical_points();
  BarrierSpec spec;
  spec.start = from_min;
  for (const auto& cp : cps)
    if (cp.is_minimum && cp.F_value < from_min.F_value - tie_tolerance)
      spec.deeper.push_back(cp);
  if (spec.deeper.empty())
    throw std::runtime_error("no deeper minimum");

  // For each side, the highest maximum between m0* and the nearest deeper
  // minimum; the saddle is the lower of the two.
  std::optional<CriticalPoint> left, right;
  double nearest_left = -2.0, nearest_right = 2.0;
  for (const auto& d : spec.deeper) {
    if (d.m_star < from_min.m_star) nearest_left = std::max(nearest_left, d.m_star);
    if (d.m_star > from_min.m_star) nearest_right = std::min(nearest_right, d.m_star);
  }
  auto highest_max_between = [&](double lo, double hi) {
    std::optional<CriticalPoint> best;
    for (const auto& cp : cps)
      if (!cp.is_minimum && cp.m_star > lo && cp.m_star < hi)
        if (!best || cp.F_value > best->F_value) best = cp;
    return best;
  };
  if (nearest_left > -2.0)
    left = highest_max_between(nearest_left, from_min.m_star);
  if (nearest_right < 2.0)
    right = highest_max_between(from_min.m_star, nearest_right);
  if (left && right)
    spec.saddle = left->F_value <= right->F_value ? *left : *right;
  else if (left)
    spec.saddle = *left;
  else if (right)
    spec.saddle = *right;
  else
    throw std::runtime_error("no separating maximum found");

  // Explicit representation of F(z*) - F(m0*)
  const double beta = params_.beta;
  double s = 0.0;
  for (double h : field_.h) {
    auto lc = [&](double x) {
      x = std::abs(x);
      return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
    };
    s += lc(beta * (spec.saddle.m_star + h)) - lc(beta * (from_min.m_star + h));
  }
  spec.delta_F =
      0.5 * (spec.saddle.m_star * spec.saddle.m_star -
             from_min.m_star * from_min.m_star) -
      s / (beta * params_.N);
  if (!(spec.delta_F > 0.0))
    throw std::runtime_error("barrier: nonpositive delta_F");
  return spec;
}

void Landscape1D::write_csv(std::ostream& os, int grid_points) const {
  os << "m,F,I,a\n" << std::setprecision(17);
  double clampm = 1.0 - 2.0 / params_.N;
  for (int k = 0; k <= grid_points; ++k) {
    double m = -clampm + 2.0 * clampm * k / grid_points;
    LegendreResult lr = legendre(m);
    double F = -0.5 * m * m + lr.rate / params_.beta;
    double a = -1.0 + lr.deriv2 / params_.beta;
    os << m << "," << F << "," << lr.rate << "," << a << "\n";
  }
}

}  // namespace rfcw
