#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfcw {

struct SystemParams {
  int N = 2;
  double beta = 1.0;

  void validate() const;
};

// Distribution of the per-site field h_i.  Bounded support is required.
struct FieldDistribution {
  enum class Kind { Constant, TwoValued, Uniform, Discrete };

  Kind kind = Kind::Constant;
  // Constant: values = {c}
  // TwoValued: values = {-eps, +eps}, probs = {1-p, p}
  // Uniform: values = {lo, hi}
  // Discrete: values/probs are the atoms
  std::vector<double> values;
  std::vector<double> probs;

  static FieldDistribution constant(double c);
  static FieldDistribution two_valued(double eps, double p = 0.5);
  static FieldDistribution uniform(double lo, double hi);
  static FieldDistribution discrete(std::vector<double> values,
                                    std::vector<double> probs);

  // Smallest bound S with |h| <= S almost surely.
  double support_bound() const;
  // Closed interval [lo,hi] containing the support.
  double support_lo() const;
  double support_hi() const;

  double draw(class CounterRng& rng) const;

  // E f(h), analytic: exact sum over atoms, Gauss-Legendre for Uniform.
  double expect(const std::function<double(double)>& f) const;

  std::string to_string() const;
  static FieldDistribution parse(const std::string& text);

  void validate() const;
};

struct RandomField {
  std::vector<double> h;
  FieldDistribution dist;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(h.size()); }
  double mean() const;
};

struct SpinConfig {
  std::vector<std::int8_t> sigma;  // entries in {-1,+1}

  int size() const { return static_cast<int>(sigma.size()); }
};

// Deterministic given (dist, N, seed); stream id 0 is reserved for field
// sampling so simulation replicas never share randomness with it.
RandomField sample_field(const FieldDistribution& dist, int N,
                         std::uint64_t seed);

double magnetization(const SpinConfig& sigma);

double hamiltonian(const SpinConfig& sigma, const RandomField& field);

// H(sigma^i) - H(sigma) in closed form: 2*sigma_i*(m + h_i) - 2/N.
double flip_delta(const SpinConfig& sigma, int i, const RandomField& field);

struct MetropolisProfile {
  std::vector<double> flip_prob;  // (1/N) exp(-beta [dH]_+)
  double holding = 0.0;           // 1 - sum of flip_prob
};

MetropolisProfile metropolis_profile(const SpinConfig& sigma,
                                     const RandomField& field,
                                     const SystemParams& params);

// Text serialization: header "N beta dist seed", then one h_i per line.
void write_field(std::ostream& os, const RandomField& field,
                 const SystemParams& params);
struct FieldFile {
  SystemParams params;
  RandomField field;
};
FieldFile read_field(std::istream& is);

}  // namespace rfcw
