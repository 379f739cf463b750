#include "dgmsm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

constexpr double kUnitTolerance = 1e-8;

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& K) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(K, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
  std::vector<std::complex<double>> values(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::stable_sort(values.begin(), values.end(),
                   [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  return values;
}

}  // namespace

const char* to_string(MatrixSource s) {
  switch (s) {
    case MatrixSource::resample: return "resample";
    case MatrixSource::generative: return "generative";
    case MatrixSource::count: return "count";
    case MatrixSource::oracle: return "oracle";
  }
  return "?";
}

void TransitionMatrix::validate(double tol) const {
  if (K.rows() < 1 || K.rows() != K.cols()) throw NumericError("transition matrix must be square and nonempty");
  if (!K.allFinite()) throw NumericError("transition matrix has non-finite entries");
  if (K.minCoeff() < -tol) throw NumericError("transition matrix has negative entries");
  const double worst = (K.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (worst > tol) throw NumericError("transition matrix rows deviate from 1 by " + std::to_string(worst));
}

Eigen::VectorXd stationary_vector(const TransitionMatrix& T) {
  T.validate();
  const auto values = sorted_eigenvalues(T.K);
  const auto units = std::count_if(values.begin(), values.end(),
                                   [](const auto& v) { return std::abs(1.0 - std::abs(v)) < kUnitTolerance; });
  if (units != 1) {
    throw DegeneracyError(std::to_string(units) + " unit-magnitude eigenvalues; chain is disconnected or periodic");
  }
  const Eigen::Index m = T.K.rows();
  const Eigen::MatrixXd Kt = T.K.transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < 1'000'000; ++it) {
    Eigen::VectorXd next = Kt * pi;
    next /= next.sum();
    const double residual = (next - pi).cwiseAbs().maxCoeff();
    pi = std::move(next);
    if (residual <= 1e-12) return pi;
  }
  // Slow mixing: fall back to the direct solve of (K^T - I) pi = 0, sum(pi) = 1.
  Eigen::MatrixXd A = Kt - Eigen::MatrixXd::Identity(m, m);
  A.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  pi = A.fullPivLu().solve(rhs).cwiseMax(0.0);
  return pi / pi.sum();
}

std::vector<double> implied_timescales(const TransitionMatrix& T) {
  if (T.K.rows() < 1 || T.K.rows() != T.K.cols()) throw NumericError("transition matrix must be square");
  const auto values = sorted_eigenvalues(T.K);
  std::vector<double> out;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double mag = std::abs(values[i]);
    if (mag >= 1.0 - kUnitTolerance) {
      throw SpectralError("|lambda_" + std::to_string(i + 1) + "| = " + std::to_string(mag) + " >= 1");
    }
    out.push_back(mag == 0.0 ? 0.0 : -static_cast<double>(T.lag) / std::log(mag));
  }
  return out;
}

Eigen::VectorXd stationary_density_weights(const Eigen::VectorXd& pi, const Eigen::MatrixXd& landing_weights) {
  if (landing_weights.cols() != pi.size()) throw DomainError("state count mismatch between pi and landing weights");
  return landing_weights * pi;
}

std::vector<CkRow> ck_test(const TransitionMatrix& base, std::span<const int> ns,
                           const std::function<TransitionMatrix(int)>& estimate_at) {
  std::vector<CkRow> rows;
  for (int n : ns) {
    if (n < 1) throw DomainError("CK multiples must be >= 1");
    if (n == 1) {
      rows.push_back({1, 0.0});
      continue;
    }
    Eigen::MatrixXd power = base.K;
    for (int k = 1; k < n; ++k) power = power * base.K;
    const TransitionMatrix long_lag = estimate_at(n);
    if (long_lag.K.rows() != base.K.rows()) throw DomainError("re-estimated matrix has a different state count");
    rows.push_back({n, (power - long_lag.K).cwiseAbs().maxCoeff()});
  }
  return rows;
}

double kl_divergence(const Eigen::VectorXd& p_hist, const Eigen::VectorXd& q_hist, double pseudocount) {
  if (p_hist.size() != q_hist.size() || p_hist.size() == 0) throw DomainError("histograms must share a binning");
  if ((p_hist.array() < 0.0).any() || (q_hist.array() < 0.0).any()) throw DomainError("histograms must be nonnegative");
  const double p_total = p_hist.sum();
  if (!(p_total > 0.0)) throw DomainError("KL: p histogram is empty");
  const Eigen::VectorXd p = p_hist / p_total;
  Eigen::VectorXd q = q_hist.array() + pseudocount;
  const double q_total = q.sum();
  if (!(q_total > 0.0)) throw NumericError("KL: q histogram is empty");
  q /= q_total;
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) throw NumericError("KL divergence is infinite: q is zero in bin " + std::to_string(i));
    kl += p(i) * std::log(p(i) / q(i));
  }
  return kl;
}

Eigen::VectorXd Binning::edges() const { return Eigen::VectorXd::LinSpaced(bins + 1, lo, hi); }

Eigen::VectorXd Binning::centers() const {
  const Eigen::VectorXd e = edges();
  return 0.5 * (e.head(bins) + e.tail(bins));
}

int Binning::bin_of(double x) const {
  const int i = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
  return std::clamp(i, 0, bins - 1);
}

Eigen::VectorXd histogram(const Eigen::VectorXd& values, const Binning& binning, const Eigen::VectorXd& weights) {
  if (weights.size() != 0 && weights.size() != values.size()) throw DomainError("weights and values differ in length");
  Eigen::VectorXd h = Eigen::VectorXd::Zero(binning.bins);
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    h(binning.bin_of(values(k))) += weights.size() ? weights(k) : 1.0;
  }
  const double total = h.sum();
  if (total > 0.0) h /= total;
  return h;
}

Eigen::VectorXd rebin(const Eigen::VectorXd& edges, const Eigen::VectorXd& mass, const Binning& target) {
  if (edges.size() != mass.size() + 1) throw DomainError("edges must have one more entry than masses");
  const Eigen::VectorXd t = target.edges();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(target.bins);
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    const double a = edges(i);
    const double b = edges(i + 1);
    for (int j = 0; j < target.bins; ++j) {
      const double overlap = std::min(b, t(j + 1)) - std::max(a, t(j));
      if (overlap > 0.0) out(j) += mass(i) * overlap / (b - a);
    }
  }
  return out;
}

ReplicateStats replicate_stats(std::span<const double> values) {
  ReplicateStats s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace dgmsm
