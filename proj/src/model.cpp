#include "rfcw/model.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rfcw/rng.hpp"

namespace rfcw {

void SystemParams::validate() const {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
}

FieldDistribution FieldDistribution::constant(double c) {
  FieldDistribution d;
  d.kind = Kind::Constant;
  d.values = {c};
  return d;
}

FieldDistribution FieldDistribution::two_valued(double eps, double p) {
  FieldDistribution d;
  d.kind = Kind::TwoValued;
  d.values = {-eps, eps};
  d.probs = {1.0 - p, p};
  d.validate();
  return d;
}

FieldDistribution FieldDistribution::uniform(double lo, double hi) {
  FieldDistribution d;
  d.kind = Kind::Uniform;
  d.values = {lo, hi};
  d.validate();
  return d;
}

FieldDistribution FieldDistribution::discrete(std::vector<double> values,
                                              std::vector<double> probs) {
  FieldDistribution d;
  d.kind = Kind::Discrete;
  d.values = std::move(values);
  d.probs = std::move(probs);
  d.validate();
  return d;
}

void FieldDistribution::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (values.size() != 1) throw std::invalid_argument("constant: one value");
      break;
    case Kind::TwoValued:
    case Kind::Discrete: {
      if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("discrete: values/probs mismatch");
      double s = 0.0;
      for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("negative probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to 1");
      break;
    }
    case Kind::Uniform:
      if (values.size() != 2 || !(values[0] <= values[1]))
        throw std::invalid_argument("uniform: need lo <= hi");
      if (!std::isfinite(values[0]) || !std::isfinite(values[1]))
        throw std::invalid_argument("unbounded support rejected");
      break;
  }
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("unbounded support rejected");
}

double FieldDistribution::support_lo() const {
  double lo = values[0];
  for (double v : values) lo = std::min(lo, v);
  return lo;
}

double FieldDistribution::support_hi() const {
  double hi = values[0];
  for (double v : values) hi = std::max(hi, v);
  return hi;
}

double FieldDistribution::support_bound() const {
  return std::max(std::abs(support_lo()), std::abs(support_hi()));
}

double FieldDistribution::draw(CounterRng& rng) const {
  switch (kind) {
    case Kind::Constant:
      rng.next_double();  // keep the counter advancing uniformly
      return values[0];
    case Kind::Uniform: {
      double u = rng.next_double();
      return values[0] + u * (values[1] - values[0]);
    }
    case Kind::TwoValued:
    case Kind::Discrete: {
      double u = rng.next_double();
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        acc += probs[k];
        if (u < acc) return values[k];
      }
      return values.back();
    }
  }
  throw std::logic_error("unreachable");
}

double FieldDistribution::expect(const std::function<double(double)>& f) const {
  switch (kind) {
    case Kind::Constant:
      return f(values[0]);
    case Kind::TwoValued:
    case Kind::Discrete: {
      double s = 0.0;
      for (std::size_t k = 0; k < values.size(); ++k) s += probs[k] * f(values[k]);
      return s;
    }
    case Kind::Uniform: {
      // 32-point Gauss-Legendre on [lo,hi]
      static const double xs[16] = {
          0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
          0.3318686022821276497, 0.4213512761306353454, 0.5068999089322293900,
          0.5877157572407623290, 0.6630442669302152010, 0.7321821187402896804,
          0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
          0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
          0.9972638618494815635};
      static const double ws[16] = {
          0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
          0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
          0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
          0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
          0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
          0.0070186100094700966};
      double lo = values[0], hi = values[1];
      double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      double s = 0.0;
      for (int k = 0; k < 16; ++k)
        s += ws[k] * (f(c + r * xs[k]) + f(c - r * xs[k]));
      return 0.5 * s;
    }
  }
  throw std::logic_error("unreachable");
}

std::string FieldDistribution::to_string() const {
  std::ostringstream os;
  os << std::setprecision(17);
  switch (kind) {
    case Kind::Constant:
      os << "constant(" << values[0] << ")";
      break;
    case Kind::TwoValued:
      os << "two_valued(" << values[1] << "," << probs[1] << ")";
      break;
    case Kind::Uniform:
      os << "uniform(" << values[0] << "," << values[1] << ")";
      break;
    case Kind::Discrete: {
      os << "discrete(";
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) os << ";";
        os << values[k] << ":" << probs[k];
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

FieldDistribution FieldDistribution::parse(const std::string& text) {
  auto lp = text.find('(');
  auto rp = text.rfind(')');
  if (lp == std::string::npos || rp == std::string::npos || rp < lp)
    throw std::invalid_argument("bad distribution spec: " + text);
  std::string name = text.substr(0, lp);
  std::string args = text.substr(lp + 1, rp - lp - 1);
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(tok);
    return out;
  };
  if (name == "constant") return constant(std::stod(args));
  if (name == "two_valued") {
    auto parts = split(args, ',');
    double eps = std::stod(parts.at(0));
    double p = parts.size() > 1 ? std::stod(parts[1]) : 0.5;
    return two_valued(eps, p);
  }
  if (name == "uniform") {
    auto parts = split(args, ',');
    return uniform(std::stod(parts.at(0)), std::stod(parts.at(1)));
  }
  if (name == "discrete") {
    std::vector<double> vs, ps;
    for (auto& atom : split(args, ';')) {
      auto kv = split(atom, ':');
      vs.push_back(std::stod(kv.at(0)));
      ps.push_back(std::stod(kv.at(1)));
    }
    return discrete(std::move(vs), std::move(ps));
  }
  throw std::invalid_argument("unknown distribution kind: " + name);
}

double RandomField::mean() const {
  double s = 0.0;
  for (double v : h) s += v;
  return h.empty() ? 0.0 : s / static_cast<double>(h.size());
}

RandomField sample_field(const FieldDistribution& dist, int N,
                         std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  dist.validate();
  RandomField f;
  f.dist = dist;
  f.seed = seed;
  f.h.resize(N);
  CounterRng rng(seed, /*stream=*/0);
  for (int i = 0; i < N; ++i) f.h[i] = dist.draw(rng);
  return f;
}

double magnetization(const SpinConfig& sigma) {
  long s = 0;
  for (auto v : sigma.sigma) s += v;
  return static_cast<double>(s) / static_cast<double>(sigma.size());
}

double hamiltonian(const SpinConfig& sigma, const RandomField& field) {
  if (sigma.size() != field.size())
    throw std::invalid_argument("sigma/field length mismatch");
  const int N = sigma.size();
  double m = magnetization(sigma);
  double hs = 0.0;
  for (int i = 0; i < N; ++i) hs += field.h[i] * sigma.sigma[i];
  return -0.5 * N * m * m - hs;
}

double flip_delta(const SpinConfig& sigma, int i, const RandomField& field) {
  const int N = sigma.size();
  if (i < 0 || i >= N) throw std::out_of_range("site index");
  double m = magnetization(sigma);
  return 2.0 * sigma.sigma[i] * (m + field.h[i]) - 2.0 / N;
}

MetropolisProfile metropolis_profile(const SpinConfig& sigma,
                                     const RandomField& field,
                                     const SystemParams& params) {
  const int N = sigma.size();
  MetropolisProfile prof;
  prof.flip_prob.resize(N);
  double m = magnetization(sigma);
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    double dh = 2.0 * sigma.sigma[i] * (m + field.h[i]) - 2.0 / N;
    double p = (1.0 / N) * std::exp(-params.beta * std::max(dh, 0.0));
    prof.flip_prob[i] = p;
    total += p;
  }
  prof.holding = 1.0 - total;
  return prof;
}

void write_field(std::ostream& os, const RandomField& field,
                 const SystemParams& params) {
  os << field.size() << " " << std::setprecision(17) << params.beta << " "
     << field.dist.to_string() << " " << field.seed << "\n";
  for (double v : field.h) os << std::setprecision(17) << v << "\n";
}

FieldFile read_field(std::istream& is) {
  FieldFile ff;
  int N;
  std::string dist_text;
  if (!(is >> N >> ff.params.beta >> dist_text >> ff.field.seed))
    throw std::runtime_error("bad field file header");
  ff.params.N = N;
  ff.field.dist = FieldDistribution::parse(dist_text);
  ff.field.h.resize(N);
  for (int i = 0; i < N; ++i)
    if (!(is >> ff.field.h[i])) throw std::runtime_error("short field file");
  return ff;
}

}  // namespace rfcw
