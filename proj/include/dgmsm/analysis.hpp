#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dgmsm {

enum class MatrixSource { resample, generative, count, oracle };

const char* to_string(MatrixSource s);

/// Row-stochastic m x m matrix of state-to-state jump probabilities at `lag` frames.
struct TransitionMatrix {
  Eigen::MatrixXd K;
  int lag = 1;
  MatrixSource source = MatrixSource::count;

  int states() const { return static_cast<int>(K.rows()); }
  /// Throws NumericError unless entries are >= -tol and rows sum to 1 within tol.
  void validate(double tol = 1e-9) const;
};

/// Stationary vector pi = K^T pi by power iteration to residual 1e-12.
/// Throws DegeneracyError when K has more than one unit-magnitude eigenvalue.
Eigen::VectorXd stationary_vector(const TransitionMatrix& K);

/// t_i = -lag / ln|lambda_i|, i = 2..m, sorted by |lambda| descending.
std::vector<double> implied_timescales(const TransitionMatrix& K);

/// Per-frame stationary weights sum_i pi_i w[t][i] (w is N x m, columns sum to 1).
Eigen::VectorXd stationary_density_weights(const Eigen::VectorXd& pi, const Eigen::MatrixXd& landing_weights);

struct CkRow {
  int n = 1;
  double max_abs_deviation = 0.0;
};

/// max |K(lag)^n - K(n lag)| for each n; `estimate_at(n)` must return the
/// re-estimated matrix at lag n * base.lag. n = 1 compares base with itself.
std::vector<CkRow> ck_test(const TransitionMatrix& base, std::span<const int> ns,
                           const std::function<TransitionMatrix(int)>& estimate_at);

/// sum_i p_i ln(p_i / q_i) over p_i > 0 after normalizing both; q gets
/// `pseudocount` added per bin before normalization. Throws NumericError if
/// some q_i is still zero where p_i > 0.
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double pseudocount = 1e-10);

/// Uniform bins over [lo, hi]; values outside are clamped into the edge bins.
struct Binning {
  double lo = -1.0;
  double hi = 1.0;
  int bins = 100;

  Eigen::VectorXd edges() const;
  Eigen::VectorXd centers() const;
  int bin_of(double x) const;
  bool operator==(const Binning&) const = default;
};

/// Normalized histogram; `weights` may be empty (unit weights).
Eigen::VectorXd histogram(const Eigen::VectorXd& values, const Binning& binning,
                          const Eigen::VectorXd& weights = Eigen::VectorXd());

/// Redistributes per-bin masses on `edges` onto `target` assuming a
/// piecewise-constant density inside each source bin.
Eigen::VectorXd rebin(const Eigen::VectorXd& edges, const Eigen::VectorXd& mass, const Binning& target);

struct ReplicateStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

ReplicateStats replicate_stats(std::span<const double> values);

}  // namespace dgmsm
