#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgmsm/potential.hpp"

namespace dgmsm {

/// One-step transition matrix of the Euler–Maruyama chain discretized on a
/// uniform grid (bin centers as evaluation points).
struct GridKernel {
  Eigen::VectorXd edges;  // n_bins + 1
  Eigen::MatrixXd P;      // row-stochastic
  double dt = 0.01;

  int n_bins() const { return static_cast<int>(P.rows()); }
  Eigen::VectorXd centers() const;
  int bin_of(double x) const;
};

/// P[i][j] ∝ exp(-(c_j - c_i - dt force(c_i))^2 / (4 dt)), rows normalized.
GridKernel build_kernel(const PotentialSpec& spec, int n_bins = 256, double dt = 0.01);

/// P^lag by repeated squaring.
Eigen::MatrixXd kernel_power(const GridKernel& kernel, long lag_steps);

/// Left eigenvector for eigenvalue 1, normalized to sum 1. Throws
/// DegeneracyError when the unit eigenvalue is not simple.
Eigen::VectorXd oracle_stationary(const GridKernel& kernel);

/// -lag / ln|lambda_i| for i = 2..k of P^lag, in integrator steps.
std::vector<double> oracle_timescales(const GridKernel& kernel, long lag_steps, int k);

/// Row x_bin of P^lag.
Eigen::VectorXd oracle_transition_density(const GridKernel& kernel, long lag_steps, int x_bin);

/// Sum of the m largest squared singular values of the lag-`lag_steps`
/// transfer operator in the stationary-weighted inner product; an upper bound
/// for the VAMP-E score of any rank-m model of the chain.
double oracle_vamp_e_bound(const GridKernel& kernel, long lag_steps, int m);

/// Writes "bin_center,value".
void export_bin_csv(const GridKernel& kernel, const Eigen::VectorXd& values,
                    const std::filesystem::path& path, const std::string& comment = "");

}  // namespace dgmsm
