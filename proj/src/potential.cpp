#include "dgmsm/potential.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

#include "dgmsm/errors.hpp"

namespace dgmsm {

PotentialSpec PotentialSpec::prinz() {
  PotentialSpec spec;
  spec.terms = {
      {4.0, Monomial{8}},
      {4.0 * 0.8, Gaussian{0.0, 80.0}},
      {4.0 * 0.2, Gaussian{0.5, 80.0}},
      {4.0 * 0.5, Gaussian{-0.5, 40.0}},
  };
  spec.domain = {-1.0, 1.0};
  return spec;
}

namespace {

void check_domain(const PotentialSpec& spec, double x) {
  if (!spec.domain.contains(x)) {
    throw DomainError("position " + std::to_string(x) + " outside potential domain [" +
                      std::to_string(spec.domain.lo) + ", " + std::to_string(spec.domain.hi) + "]");
  }
}

struct TermValue {
  double value;
  double derivative;
};

TermValue evaluate(const PotentialTerm& term, double x) {
  if (const auto* mono = std::get_if<Monomial>(&term.kind)) {
    const int n = mono->degree;
    if (n == 0) return {term.coefficient, 0.0};
    const double lower = std::pow(x, n - 1);
    return {term.coefficient * lower * x, term.coefficient * n * lower};
  }
  const auto& g = std::get<Gaussian>(term.kind);
  const double u = x - g.center;
  const double e = std::exp(-g.width_exponent * u * u);
  return {term.coefficient * e, term.coefficient * e * (-2.0 * g.width_exponent * u)};
}

std::vector<double> extrema(const PotentialSpec& spec, int resolution, bool minima) {
  std::vector<double> out;
  const double lo = spec.domain.lo;
  const double h = spec.domain.width() / (resolution - 1);
  double prev = energy(spec, lo);
  double cur = energy(spec, lo + h);
  for (int i = 2; i < resolution; ++i) {
    const double x = i + 1 == resolution ? spec.domain.hi : lo + i * h;
    const double next = energy(spec, x);
    const bool hit = minima ? (cur < prev && cur < next) : (cur > prev && cur > next);
    if (hit) out.push_back(lo + (i - 1) * h);
    prev = cur;
    cur = next;
  }
  return out;
}

}  // namespace

double energy(const PotentialSpec& spec, double x) {
  check_domain(spec, x);
  double v = 0.0;
  for (const auto& t : spec.terms) v += evaluate(t, x).value;
  return v;
}

double force(const PotentialSpec& spec, double x) {
  check_domain(spec, x);
  double dv = 0.0;
  for (const auto& t : spec.terms) dv += evaluate(t, x).derivative;
  return -dv;
}

std::vector<double> local_minima(const PotentialSpec& spec, int resolution) {
  return extrema(spec, resolution, true);
}

std::vector<double> local_maxima(const PotentialSpec& spec, int resolution) {
  return extrema(spec, resolution, false);
}

void to_json(nlohmann::json& j, const PotentialSpec& spec) {
  auto terms = nlohmann::json::array();
  for (const auto& t : spec.terms) {
    if (const auto* mono = std::get_if<Monomial>(&t.kind)) {
      terms.push_back({{"coefficient", t.coefficient}, {"kind", "monomial"}, {"degree", mono->degree}});
    } else {
      const auto& g = std::get<Gaussian>(t.kind);
      terms.push_back({{"coefficient", t.coefficient},
                       {"kind", "gaussian"},
                       {"center", g.center},
                       {"width_exponent", g.width_exponent}});
    }
  }
  j = {{"terms", terms}, {"domain", {spec.domain.lo, spec.domain.hi}}};
}

void from_json(const nlohmann::json& j, PotentialSpec& spec) {
  spec.terms.clear();
  for (const auto& t : j.at("terms")) {
    PotentialTerm term;
    term.coefficient = t.at("coefficient").get<double>();
    const auto kind = t.at("kind").get<std::string>();
    if (kind == "monomial") {
      term.kind = Monomial{t.at("degree").get<int>()};
    } else if (kind == "gaussian") {
      term.kind = Gaussian{t.at("center").get<double>(), t.at("width_exponent").get<double>()};
    } else {
      throw DataError("unknown potential term kind '" + kind + "'");
    }
    spec.terms.push_back(term);
  }
  spec.domain = {j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>()};
}

}  // namespace dgmsm
