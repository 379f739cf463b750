#pragma once

// Finite-difference references shared by the unit tests and the acceptance run.

#include <vector>

#include "dgmsm/gen_msm.hpp"
#include "dgmsm/nn.hpp"
#include "helpers.hpp"

namespace testing {

/// Central differences of sum(G .* forward(X)) over every weight.
inline Eigen::VectorXd numeric_gradient(dgmsm::nn::Network net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& G,
                                        dgmsm::nn::Mode mode, double h = 1e-6) {
  Eigen::VectorXd theta = net.params().values;
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double keep = theta(k);
    theta(k) = keep + h;
    net.set_values(theta);
    const double up = (G.array() * net.forward(X, mode).array()).sum();
    theta(k) = keep - h;
    net.set_values(theta);
    const double down = (G.array() * net.forward(X, mode).array()).sum();
    theta(k) = keep;
    g(k) = (up - down) / (2 * h);
  }
  return g;
}

inline double backprop_error(const dgmsm::nn::NetSpec& spec, dgmsm::nn::Mode mode, std::uint64_t seed) {
  dgmsm::Rng rng(seed);
  dgmsm::nn::Network net(spec, rng);
  const Eigen::MatrixXd X = random_matrix(7, spec.input_dim, rng);
  const Eigen::MatrixXd G = random_matrix(7, spec.output_dim, rng);
  dgmsm::nn::ForwardCache cache;
  net.forward(X, mode, &cache);
  return rel_error(net.backward(cache, G), numeric_gradient(net, X, G, mode));
}

inline dgmsm::GeneratorModel toy_generator(int m, int d, bool bn, std::uint64_t seed) {
  dgmsm::Rng rng(seed);
  dgmsm::nn::NetSpec chi;
  chi.input_dim = d;
  chi.hidden = {8};
  chi.batch_norm = bn;
  chi.activation = dgmsm::nn::Activation::elu;
  chi.output_dim = m;
  dgmsm::nn::NetSpec gen = chi;
  gen.input_dim = m + 1;
  gen.head = dgmsm::nn::Head::linear;
  gen.output_dim = d;
  dgmsm::GeneratorModel model;
  model.chi = dgmsm::nn::Network(chi, rng);
  model.gen = dgmsm::nn::Network(gen, rng);
  model.noise_dim = 1;
  model.validate();
  return model;
}

/// Pathwise generator gradient against central differences of the batch
/// mean of d with the state and noise draws held fixed.
inline double generator_gradient_error(bool bn, std::uint64_t seed) {
  using namespace dgmsm;
  const GeneratorModel model = toy_generator(3, 2, bn, seed);
  Rng rng(seed + 1);
  const Frames x = random_matrix(9, 2, rng);
  const Frames y = random_matrix(9, 2, rng);
  const EdDraws draws = draw_ed(model.chi.forward(x, nn::Mode::eval), 1, rng);
  nn::ForwardCache cache;
  const EdTerms t = ed_terms(model, draws, y, nn::Mode::train, &cache);
  const Eigen::VectorXd g = ed_gradients(model, cache, t, y).gen;

  GeneratorModel probe = model;
  Eigen::VectorXd theta = model.gen.params().values;
  Eigen::VectorXd fd(theta.size());
  const double h = 1e-6;
  auto mean_d = [&] { return ed_terms(probe, draws, y, nn::Mode::train).d.mean(); };
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double keep = theta(k);
    theta(k) = keep + h;
    probe.gen.set_values(theta);
    const double up = mean_d();
    theta(k) = keep - h;
    probe.gen.set_values(theta);
    const double down = mean_d();
    theta(k) = keep;
    fd(k) = (up - down) / (2 * h);
  }
  return rel_error(g, fd);
}

/// E[d] with the state draws summed out exactly and the noise held fixed.
inline double expected_d(const dgmsm::GeneratorModel& model, const dgmsm::Frames& x, const dgmsm::Frames& y,
                         const Eigen::MatrixXd& eps, const Eigen::MatrixXd& eps2) {
  using namespace dgmsm;
  const int m = model.states();
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd chi = model.chi.forward(x, nn::Mode::eval);
  std::vector<Eigen::MatrixXd> a, a2;
  for (int i = 0; i < m; ++i) {
    const std::vector<int> s(static_cast<std::size_t>(n), i);
    a.push_back(model.gen.forward(generator_inputs(m, s, eps), nn::Mode::eval));
    a2.push_back(model.gen.forward(generator_inputs(m, s, eps2), nn::Mode::eval));
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      total += chi(k, ii) * ((a[i].row(k) - y.row(k)).norm() + (a2[i].row(k) - y.row(k)).norm());
      for (std::size_t j = 0; j < a.size(); ++j) {
        total -= chi(k, ii) * chi(k, static_cast<Eigen::Index>(j)) * (a[i].row(k) - a2[j].row(k)).norm();
      }
    }
  }
  return total / static_cast<double>(n);
}

/// Two-state toy for the score-function check: a linear generator that puts
/// state 0 near -0.5 and state 1 near +0.5, and targets y that follow sign(x).
inline dgmsm::GeneratorModel two_state_toy(std::uint64_t seed) {
  dgmsm::GeneratorModel model = toy_generator(2, 1, false, seed);
  dgmsm::nn::NetSpec gen = model.gen.spec();
  gen.hidden = {};
  model.gen = dgmsm::nn::Network::zeros(gen);
  Eigen::VectorXd w(4);
  w << -0.5, 0.5, 0.1, 0.0;  // weights for [e_0, e_1, eps], then the bias
  model.gen.set_values(w);
  model.validate();
  return model;
}

/// Score-function chi gradient over n draws against central differences of
/// the expectation, with common random numbers for the noise.
inline double chi_score_function_error(Eigen::Index n, std::uint64_t seed) {
  using namespace dgmsm;
  const GeneratorModel model = two_state_toy(seed);
  Rng rng(seed + 1);
  const Frames x = random_matrix(n, 1, rng, 0.5);
  Frames y(n, 1);
  for (Eigen::Index k = 0; k < n; ++k) y(k, 0) = (x(k, 0) > 0 ? 0.5 : -0.5) + 0.1 * rng.normal();
  const Eigen::MatrixXd eps = random_matrix(n, 1, rng);
  const Eigen::MatrixXd eps2 = random_matrix(n, 1, rng);

  nn::ForwardCache chi_cache;
  const Eigen::MatrixXd chi_x = model.chi.forward(x, nn::Mode::eval, &chi_cache);
  EdDraws draws = draw_ed(chi_x, 1, rng);
  draws.eps = eps;
  draws.eps2 = eps2;
  nn::ForwardCache gen_cache;
  const EdTerms t = ed_terms(model, draws, y, nn::Mode::eval, &gen_cache);
  const Eigen::VectorXd sf = ed_gradients(model, gen_cache, t, y, &chi_cache).chi;

  GeneratorModel probe = model;
  Eigen::VectorXd theta = model.chi.params().values;
  Eigen::VectorXd fd(theta.size());
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double keep = theta(k);
    theta(k) = keep + h;
    probe.chi.set_values(theta);
    const double up = expected_d(probe, x, y, eps, eps2);
    theta(k) = keep - h;
    probe.chi.set_values(theta);
    const double down = expected_d(probe, x, y, eps, eps2);
    theta(k) = keep;
    fd(k) = (up - down) / (2 * h);
  }
  return rel_error(sf, fd);
}

}  // namespace testing
