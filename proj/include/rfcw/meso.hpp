#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rfcw/chain.hpp"
#include "rfcw/landscape.hpp"
#include "rfcw/model.hpp"

namespace rfcw {

// Coarse graining of the field support into n equal-width intervals; sites
// fall into blocks by their field value.  Empty blocks keep rho = 0 and are
// skipped by every downstream sum.
struct Partition {
  int n = 1;
  std::vector<std::pair<double, double>> intervals;
  std::vector<std::vector<int>> blocks;  // site indices per block
  std::vector<double> rho;               // |Lambda_l| / N
  std::vector<double> hbar;              // block means
  std::vector<double> htilde;            // per-site residual h_i - hbar_l
  double epsilon = 0.0;                  // interval width
  double max_residual = 0.0;             // max_i |htilde_i|

  bool block_constant(double tol = 1e-12) const { return max_residual <= tol; }
  std::vector<int> active() const;  // block indices with rho > 0
};

Partition build_partition(const RandomField& field, int n);

// Row-major enumeration of the block-magnetization lattice: coordinate l
// ranges over k_l in {0..|Lambda_l|} with x_l = (2 k_l - |Lambda_l|)/N.
class MesoGrid {
 public:
  MesoGrid(const Partition& part, int N);

  int n() const { return static_cast<int>(sizes_.size()); }
  int N() const { return N_; }
  std::int64_t size() const { return total_; }
  int block_sites(int l) const { return sizes_[l] - 1; }

  std::int64_t index(const std::vector<int>& k) const;
  std::vector<int> coords(std::int64_t idx) const;
  double x_of(int l, int k) const {
    return (2.0 * k - block_sites(l)) / N_;
  }
  std::vector<double> point(std::int64_t idx) const;
  double magnetization(std::int64_t idx) const;
  // index after k_l += dir; -1 when that leaves the grid
  std::int64_t step(std::int64_t idx, int l, int dir) const;
  // grid point nearest to a real vector x (coordinate-wise rounding)
  std::int64_t nearest(const std::vector<double>& x) const;
  std::int64_t stride(int l) const { return strides_[l]; }

  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& hbar() const { return hbar_; }

 private:
  int N_;
  std::vector<int> sizes_;
  std::vector<std::int64_t> strides_;
  std::int64_t total_;
  std::vector<double> rho_, hbar_;
};

// E(x) = (sum x)^2/2 + sum x_l hbar_l, so that for block-constant fields
// H(sigma) = -N E(x(sigma)) - sum_i htilde_i sigma_i.
double meso_energy(const Partition& part, const std::vector<double>& x);

// Mesoscopic free energy F(x) = -E(x) + (1/beta) sum rho_l I_l(x_l/rho_l),
// with I_l the Legendre transform of the residual-field block log-mgf.
class MesoLandscape {
 public:
  MesoLandscape(SystemParams params, RandomField field, Partition part);

  const Partition& partition() const { return part_; }
  const SystemParams& params() const { return params_; }
  const RandomField& field() const { return field_; }

  double free_energy(const std::vector<double>& x) const;
  // Constrained minimizer of F over {sum x = m}.
  std::vector<double> min_energy_curve(double m) const;

  // block log-mgf U_l(t) = (1/|Lambda_l|) sum ln cosh(t + beta htilde_i)
  LogMgf block_log_mgf(int l, double t) const;
  LegendreResult block_legendre(int l, double y) const;

 private:
  SystemParams params_;
  RandomField field_;
  Partition part_;
  std::vector<std::vector<double>> beta_htilde_;  // per active block
  std::vector<double> residual_bound_;            // max |beta htilde| per block
};

struct LumpedChain {
  ReversibleChain chain;
  MesoGrid grid;
  bool exact = false;  // block-constant field: lumping is exact
};

// Magnetization-block chain induced by single-spin-flip Metropolis dynamics.
// Stationary weights are exact log-binomials times exp(beta N E); rates use
// the block means (exact when the field is block-constant).
LumpedChain lumped_chain(const Partition& part, const SystemParams& params,
                         bool with_labels = false);

struct SaddleData {
  std::vector<int> active;        // block indices with rho > 0
  std::vector<double> z_star;     // z*_l, active blocks
  double z_star_total = 0.0;      // sum z*_l = z*
  std::vector<double> lambda_hat;
  std::vector<double> r;          // saddle exit rates per direction
  Eigen::MatrixXd A;              // Hessian -11^T + diag(lambda_hat)
  Eigen::MatrixXd B;              // sqrt(r) A sqrt(r)
  std::vector<double> gamma_hat;  // eigenvalues of B, ascending
  double gamma_hat1 = 0.0;        // the unique negative one
  std::vector<double> v, v_check;  // principal pair, (v_check, v) = 1
  double condition_value = 0.0;   // (beta/N) sum (1 - tanh^2(beta(z*+h_i)))
  double dense_check = 0.0;       // secular-vs-dense eigenvalue deviation
};

SaddleData meso_saddle(const CriticalPoint& z_star_1d, const Partition& part,
                       const SystemParams& params, const RandomField& field);

// Roots of sum_k r_k/(d_k - gamma) = 1 with d_k = r_k * lambda_hat_k;
// poles merged when coincident, one root isolated per pole interval.
std::vector<double> secular_roots(const std::vector<double>& r,
                                  const std::vector<double>& d);

}  // namespace rfcw
