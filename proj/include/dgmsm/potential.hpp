#pragma once

#include <variant>
#include <vector>

#include "json.hpp"

namespace dgmsm {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool empty() const { return !(hi > lo); }
  double width() const { return hi - lo; }
};

/// x^degree
struct Monomial {
  int degree = 8;
};

/// exp(-width_exponent * (x - center)^2)
struct Gaussian {
  double center = 0.0;
  double width_exponent = 1.0;
};

struct PotentialTerm {
  double coefficient = 1.0;
  std::variant<Monomial, Gaussian> kind;
};

/// A 1D potential given as a weighted sum of terms; the formula is data.
struct PotentialSpec {
  std::vector<PotentialTerm> terms;
  Interval domain;

  /// V(x) = 4 (x^8 + 0.8 e^{-80x^2} + 0.2 e^{-80(x-0.5)^2} + 0.5 e^{-40(x+0.5)^2}) on [-1, 1].
  static PotentialSpec prinz();
};

/// Throws DomainError when x is outside spec.domain.
double energy(const PotentialSpec& spec, double x);
/// -dV/dx, evaluated analytically.
double force(const PotentialSpec& spec, double x);

/// Local minima / maxima of V on a fine interior grid, ascending.
std::vector<double> local_minima(const PotentialSpec& spec, int resolution = 200001);
std::vector<double> local_maxima(const PotentialSpec& spec, int resolution = 200001);

void to_json(nlohmann::json& j, const PotentialSpec& spec);
void from_json(const nlohmann::json& j, PotentialSpec& spec);

}  // namespace dgmsm
