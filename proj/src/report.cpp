#include "dgmsm/report.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "dgmsm/csv.hpp"
#include "dgmsm/errors.hpp"

namespace dgmsm {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double KineticsReport::slowest_relative_error() const {
  if (oracle_slowest_timescale <= 0.0) throw NumericError("oracle timescale missing from report");
  return std::abs(slowest_timescale - oracle_slowest_timescale) / oracle_slowest_timescale;
}

double KineticsReport::mean_kl_transition() const {
  if (kl_transition.empty()) return 0.0;
  double s = 0.0;
  for (double v : kl_transition) s += v;
  return s / static_cast<double>(kl_transition.size());
}

void KineticsReport::validate() const {
  if (pi.size() != states || (pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > 1e-9) {
    throw NumericError("report pi is not a probability vector");
  }
  for (std::size_t k = 0; k < timescales.size(); ++k) {
    if (!(timescales[k].value > 0.0)) throw NumericError("report timescales must be positive");
    if (k > 0 && timescales[k].lag == timescales[k - 1].lag && timescales[k].value > timescales[k - 1].value) {
      throw NumericError("report timescales are not sorted descending");
    }
  }
}

nlohmann::json to_json(const KineticsReport& r) {
  nlohmann::json j;
  j["model_tag"] = r.model_tag;
  j["seed"] = r.seed;
  j["lag"] = r.lag;
  j["states"] = r.states;
  j["pi"] = to_vector(r.pi);
  j["timescales"] = nlohmann::json::array();
  for (const auto& t : r.timescales) j["timescales"].push_back({{"lag", t.lag}, {"index", t.index}, {"value", t.value}});
  j["ck"] = nlohmann::json::array();
  for (const auto& c : r.ck) j["ck"].push_back({{"n", c.n}, {"max_abs_deviation", c.max_abs_deviation}});
  j["kl_stationary"] = r.kl_stationary;
  j["probe_points"] = r.probe_points;
  j["kl_transition"] = r.kl_transition;
  j["binning"] = {{"lo", r.binning.lo}, {"hi", r.binning.hi}, {"bins", r.binning.bins}};
  j["stationary_histogram"] = to_vector(r.stationary_histogram);
  j["oracle_histogram"] = to_vector(r.oracle_histogram);
  j["slowest_timescale"] = r.slowest_timescale;
  j["has_oracle"] = r.has_oracle;
  j["oracle_slowest_timescale"] = r.oracle_slowest_timescale;
  return j;
}

KineticsReport report_from_json(const nlohmann::json& j) {
  try {
    KineticsReport r;
    r.model_tag = j.at("model_tag").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.lag = j.at("lag").get<int>();
    r.states = j.at("states").get<int>();
    r.pi = to_eigen(j.at("pi").get<std::vector<double>>());
    for (const auto& t : j.at("timescales")) {
      r.timescales.push_back({t.at("lag").get<int>(), t.at("index").get<int>(), t.at("value").get<double>()});
    }
    for (const auto& c : j.at("ck")) r.ck.push_back({c.at("n").get<int>(), c.at("max_abs_deviation").get<double>()});
    r.kl_stationary = j.at("kl_stationary").get<double>();
    r.probe_points = j.at("probe_points").get<std::vector<double>>();
    r.kl_transition = j.at("kl_transition").get<std::vector<double>>();
    const auto& b = j.at("binning");
    r.binning = {b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("bins").get<int>()};
    r.stationary_histogram = to_eigen(j.at("stationary_histogram").get<std::vector<double>>());
    r.oracle_histogram = to_eigen(j.at("oracle_histogram").get<std::vector<double>>());
    r.slowest_timescale = j.at("slowest_timescale").get<double>();
    r.has_oracle = j.at("has_oracle").get<bool>();
    r.oracle_slowest_timescale = j.at("oracle_slowest_timescale").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

void save_report(const KineticsReport& r, const std::filesystem::path& dir, const std::string& comment) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw DataError("cannot write " + (dir / "report.json").string());
    out << to_json(r).dump(2) << '\n';
  }
  {
    auto out = open_csv(dir / "pi.csv", comment, "state,pi");
    for (Eigen::Index i = 0; i < r.pi.size(); ++i) out << i << ',' << r.pi(i) << '\n';
  }
  {
    auto out = open_csv(dir / "timescales.csv", comment, "lag,index,timescale");
    for (const auto& t : r.timescales) out << t.lag << ',' << t.index << ',' << t.value << '\n';
  }
  {
    auto out = open_csv(dir / "ck.csv", comment, "n,max_abs_deviation");
    for (const auto& c : r.ck) out << c.n << ',' << c.max_abs_deviation << '\n';
  }
  {
    auto out = open_csv(dir / "kl.csv", comment, "quantity,probe,value");
    out << "stationary,," << r.kl_stationary << '\n';
    for (std::size_t k = 0; k < r.kl_transition.size(); ++k) {
      out << "transition," << r.probe_points[k] << ',' << r.kl_transition[k] << '\n';
    }
    out << "slowest_timescale,," << r.slowest_timescale << '\n';
    out << "oracle_slowest_timescale,," << r.oracle_slowest_timescale << '\n';
  }
  {
    auto out = open_csv(dir / "histogram.csv", comment, "bin_center,model,oracle");
    const Eigen::VectorXd c = r.binning.centers();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      out << c(i) << ',' << r.stationary_histogram(i) << ',' << r.oracle_histogram(i) << '\n';
    }
  }
}

KineticsReport load_report(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "report.json" : path;
  std::ifstream in(file);
  if (!in) throw DataError("cannot open report " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  return report_from_json(j);
}

Eigen::VectorXd OracleReference::transition_hist(double x, long lag_steps) const {
  const Eigen::VectorXd row = oracle_transition_density(kernel, lag_steps, kernel.bin_of(x));
  return rebin(kernel.edges, row, binning);
}

double OracleReference::slowest_timescale(long lag_steps) const { return oracle_timescales(kernel, lag_steps, 2).front(); }

OracleReference make_reference(const PotentialSpec& spec, int grid_bins, double dt, const Binning& binning) {
  OracleReference ref;
  ref.kernel = build_kernel(spec, grid_bins, dt);
  ref.pi_grid = oracle_stationary(ref.kernel);
  ref.binning = binning;
  ref.pi_hist = rebin(ref.kernel.edges, ref.pi_grid, binning);
  return ref;
}

std::vector<CompareRow> compare_reports(const std::vector<KineticsReport>& reports) {
  if (reports.size() < 2) throw DataError("compare needs at least 2 reports");
  for (const auto& r : reports) {
    if (!(r.binning == reports.front().binning)) throw DataError("reports use different histogram binnings");
    if (!r.has_oracle) throw DataError("report '" + r.model_tag + "' has no oracle reference to compare against");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<const KineticsReport*>> groups;
  for (const auto& r : reports) {
    if (!groups.count(r.model_tag)) order.push_back(r.model_tag);
    groups[r.model_tag].push_back(&r);
  }
  std::vector<CompareRow> rows;
  for (const auto& tag : order) {
    std::vector<double> kls, klt, rel;
    for (const auto* r : groups[tag]) {
      kls.push_back(r->kl_stationary);
      klt.push_back(r->mean_kl_transition());
      rel.push_back(r->slowest_relative_error());
    }
    CompareRow row;
    row.model_tag = tag;
    row.replicates = kls.size();
    row.kl_stationary = replicate_stats(kls);
    row.kl_transition = replicate_stats(klt);
    row.timescale_relative_error = replicate_stats(rel);
    rows.push_back(row);
  }
  for (auto& row : rows) {
    row.delta_kl_stationary = row.kl_stationary.mean - rows.front().kl_stationary.mean;
    row.delta_kl_transition = row.kl_transition.mean - rows.front().kl_transition.mean;
    row.delta_timescale_relative_error = row.timescale_relative_error.mean - rows.front().timescale_relative_error.mean;
  }
  return rows;
}

void save_comparison(const std::vector<CompareRow>& rows, const std::filesystem::path& path,
                     const std::string& comment) {
  auto out = open_csv(path, comment,
                      "model_tag,replicates,kl_stationary_mean,kl_stationary_std,kl_transition_mean,kl_transition_std,"
                      "timescale_rel_error_mean,timescale_rel_error_std,delta_kl_stationary,delta_kl_transition,"
                      "delta_timescale_rel_error");
  for (const auto& r : rows) {
    out << r.model_tag << ',' << r.replicates << ',' << r.kl_stationary.mean << ',' << r.kl_stationary.stddev << ','
        << r.kl_transition.mean << ',' << r.kl_transition.stddev << ',' << r.timescale_relative_error.mean << ','
        << r.timescale_relative_error.stddev << ',' << r.delta_kl_stationary << ',' << r.delta_kl_transition << ','
        << r.delta_timescale_relative_error << '\n';
  }
}

}  // namespace dgmsm
