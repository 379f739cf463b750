#include "dgmsm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dgmsm/csv.hpp"
#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

constexpr double kUnitTolerance = 1e-8;

std::vector<std::complex<double>> eigenvalues_by_magnitude(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
  std::vector<std::complex<double>> values(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::stable_sort(values.begin(), values.end(),
                   [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  return values;
}

}  // namespace

Eigen::VectorXd GridKernel::centers() const {
  return 0.5 * (edges.head(n_bins()) + edges.tail(n_bins()));
}

int GridKernel::bin_of(double x) const {
  const double lo = edges(0);
  const double width = edges(edges.size() - 1) - lo;
  const int i = static_cast<int>(std::floor((x - lo) / width * n_bins()));
  return std::clamp(i, 0, n_bins() - 1);
}

GridKernel build_kernel(const PotentialSpec& spec, int n_bins, double dt) {
  if (n_bins < 2) throw DomainError("n_bins must be >= 2");
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  GridKernel kernel;
  kernel.dt = dt;
  kernel.edges = Eigen::VectorXd::LinSpaced(n_bins + 1, spec.domain.lo, spec.domain.hi);
  kernel.P.resize(n_bins, n_bins);  // centers() reads the bin count from P
  const Eigen::VectorXd c = kernel.centers();
  for (int i = 0; i < n_bins; ++i) {
    const double mean = c(i) + dt * force(spec, c(i));
    Eigen::ArrayXd logits = -(c.array() - mean).square() / (4.0 * dt);
    const double shift = logits.maxCoeff();  // guards exp underflow for far-off means
    Eigen::ArrayXd row = (logits - shift).exp();
    kernel.P.row(i) = (row / row.sum()).matrix().transpose();
  }
  return kernel;
}

Eigen::MatrixXd kernel_power(const GridKernel& kernel, long lag_steps) {
  if (lag_steps < 1) throw DomainError("lag_steps must be >= 1");
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(kernel.n_bins(), kernel.n_bins());
  Eigen::MatrixXd base = kernel.P;
  bool first = true;
  for (long e = lag_steps; e > 0; e >>= 1) {
    if (e & 1) {
      result = first ? base : Eigen::MatrixXd(result * base);
      first = false;
    }
    if (e > 1) base = base * base;
  }
  return result;
}

Eigen::VectorXd oracle_stationary(const GridKernel& kernel) {
  const auto values = eigenvalues_by_magnitude(kernel.P);
  const auto units = std::count_if(values.begin(), values.end(),
                                   [](const auto& v) { return std::abs(1.0 - std::abs(v)) < kUnitTolerance; });
  if (units != 1) {
    throw DegeneracyError("kernel has " + std::to_string(units) + " unit-magnitude eigenvalues");
  }
  // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  const int n = kernel.n_bins();
  Eigen::MatrixXd A = kernel.P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(rhs);
  if (!pi.allFinite()) throw NumericError("stationary solve produced non-finite values");
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

std::vector<double> oracle_timescales(const GridKernel& kernel, long lag_steps, int k) {
  if (k < 2) throw DomainError("k must be >= 2");
  const auto values = eigenvalues_by_magnitude(kernel_power(kernel, lag_steps));
  if (static_cast<int>(values.size()) < k) throw DomainError("k exceeds the number of bins");
  std::vector<double> out;
  for (int i = 1; i < k; ++i) {
    const double mag = std::abs(values[i]);
    if (mag >= 1.0 - kUnitTolerance) {
      throw SpectralError("|lambda_" + std::to_string(i + 1) + "| = 1; disconnected grid?");
    }
    out.push_back(mag == 0.0 ? 0.0 : -static_cast<double>(lag_steps) / std::log(mag));
  }
  return out;
}

Eigen::VectorXd oracle_transition_density(const GridKernel& kernel, long lag_steps, int x_bin) {
  if (x_bin < 0 || x_bin >= kernel.n_bins()) throw DomainError("bin index out of range");
  Eigen::VectorXd row = kernel_power(kernel, lag_steps).row(x_bin).transpose();
  return row;
}

double oracle_vamp_e_bound(const GridKernel& kernel, long lag_steps, int m) {
  const Eigen::VectorXd pi = oracle_stationary(kernel);
  const Eigen::VectorXd s = pi.cwiseSqrt();
  const Eigen::MatrixXd T = s.asDiagonal() * kernel_power(kernel, lag_steps) * s.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  const auto& sigma = svd.singularValues();
  return sigma.head(std::min<Eigen::Index>(m, sigma.size())).squaredNorm();
}

void export_bin_csv(const GridKernel& kernel, const Eigen::VectorXd& values,
                    const std::filesystem::path& path, const std::string& comment) {
  auto out = open_csv(path, comment, "bin_center,value");
  const Eigen::VectorXd c = kernel.centers();
  for (Eigen::Index i = 0; i < values.size(); ++i) out << c(i) << ',' << values(i) << '\n';
}

}  // namespace dgmsm
