#include "hdmmd/io.hpp"

#include "hdmmd/error.hpp"
#include "hdmmd/normal.hpp"
#include "hdmmd/parse.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace hdmmd {

namespace {

[[noreturn]] void cfg(const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigError, field + ": " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool looks_numeric(const std::string& cell) {
  try {
    parse_double(cell, "cell");
    return true;
  } catch (const Error&) {
    return false;
  }
}

const Json& at(const Json& j, const std::string& key, const std::string& field) {
  if (!j.is_object()) cfg(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) cfg(field + "." + key, "is required");
  return *it;
}

double get_number(const Json& j, const std::string& field) {
  if (!j.is_number()) cfg(field, "expected a number");
  return j.get<double>();
}

long get_integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>())) {
    cfg(field, "expected an integer");
  }
  return j.get<long>();
}

std::string get_string(const Json& j, const std::string& field) {
  if (!j.is_string()) cfg(field, "expected a string");
  return j.get<std::string>();
}

double number_or(const Json& j, const std::string& key, const std::string& field, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : get_number(*it, field + "." + key);
}

Json pair_json(const std::pair<double, double>& p) { return Json::array({json_number(p.first), json_number(p.second)}); }

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : (v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }

KernelEntry kernel_entry_from_json(const Json& j, const std::string& field) {
  KernelEntry e;
  try {
    e.kernel = parse_kernel(get_string(at(j, "kernel", field), field + ".kernel"));
  } catch (const Error& err) {
    if (err.code() == ErrorCode::ConfigError) throw;
    cfg(field + ".kernel", err.what());
  }
  const auto bw = j.find("bandwidth");
  try {
    e.bandwidth = bw == j.end() ? BandwidthPolicy::scaled(2.0) : parse_bandwidth(get_string(*bw, field + ".bandwidth"));
  } catch (const Error& err) {
    if (err.code() == ErrorCode::ConfigError) throw;
    cfg(field + ".bandwidth", err.what());
  }
  const auto label = j.find("label");
  e.label = label != j.end() ? get_string(*label, field + ".label")
                             : kernel_name(e.kernel) + "/" + bandwidth_name(e.bandwidth);
  return e;
}

std::uint64_t seed_from_json(const Json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() != "random") cfg(field, "expected an integer or \"random\"");
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  if (!j.is_number_unsigned() && !j.is_number_integer()) cfg(field, "expected an integer or \"random\"");
  if (j.is_number_integer() && j.get<long long>() < 0) cfg(field, "must be >= 0");
  return j.get<std::uint64_t>();
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

SampleMatrix read_csv_matrix(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (rows.empty() && line_no == 1 && std::none_of(cells.begin(), cells.end(), looks_numeric)) continue;  // header
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      try {
        v = parse_double(cells[c], "cell");
      } catch (const Error&) {
        fail(ErrorCode::ParseError, source + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                        ": not a finite number: '" + cells[c] + "'");
      }
      if (!std::isfinite(v)) {
        fail(ErrorCode::ParseError, source + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                        ": not a finite number: '" + cells[c] + "'");
      }
      row.push_back(v);
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      fail(ErrorCode::ParseError, source + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                                      " columns, expected " + std::to_string(width));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, source + ": no data rows");
  RowMatrix m(static_cast<long>(rows.size()), static_cast<long>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < width; ++k) m(static_cast<long>(i), static_cast<long>(k)) = rows[i][k];
  }
  return SampleMatrix(std::move(m));
}

SampleMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, path + ": cannot open file");
  return read_csv_matrix(in, path);
}

void write_csv_matrix(std::ostream& out, const SampleMatrix& x) {
  for (long i = 0; i < x.rows(); ++i) {
    for (long k = 0; k < x.cols(); ++k) {
      if (k) out << ',';
      out << format_number(x(i, k));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON out

Json json_number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return round_significant(value);
}

Json to_json(const TestResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mmd_stat"] = json_number(r.mmd_stat);
  j["var_hat"] = json_number(r.var_hat);
  j["z_score"] = json_number(r.z_score);
  j["p_value"] = json_number(r.p_value);
  j["reject"] = r.reject;
  j["alpha"] = json_number(r.alpha);
  j["tau_hats"] = {{"tau1", json_number(r.tau_hats.tau1)},
                   {"tau2", json_number(r.tau_hats.tau2)},
                   {"tau3", json_number(r.tau_hats.tau3)}};
  j["trace_hats"] = {{"tr_sigma1_sq", json_number(r.trace_hats.tr_sigma1_sq)},
                     {"tr_sigma2_sq", json_number(r.trace_hats.tr_sigma2_sq)},
                     {"tr_sigma1_sigma2", json_number(r.trace_hats.tr_sigma1_sigma2)}};
  j["kernel"] = r.kernel;
  j["bandwidth"] = json_number(r.bandwidth);
  j["n"] = r.n;
  j["m"] = r.m;
  j["p"] = r.p;
  return j;
}

Json to_json(const PowerPrediction& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["regime"] = regime_name(p.regime);
  j["delta0"] = json_number(p.delta0);
  j["t1"] = json_number(p.t1);
  j["t1_std_error"] = json_number(p.t1_std_error);
  j["mmd_pop"] = json_number(p.mmd_pop);
  j["mmd_pop_std_error"] = json_number(p.mmd_pop_std_error);
  j["var_components"] = {{"v11", json_number(p.components.v11)},
                         {"v12", json_number(p.components.v12)},
                         {"v13", json_number(p.components.v13)}};
  j["var_delta1"] = json_number(p.var_delta1);
  j["signal"] = json_number(p.signal);
  j["predicted_power"] = json_number(p.predicted_power);
  j["power_band"] = Json::array({json_number(p.power_lower), json_number(p.power_upper)});
  return j;
}

Json to_json(const ModelSpec& m) {
  Json j;
  j["p"] = m.p;
  switch (m.transform) {
    case Transform::LinearMap: j["transform"] = "linear"; break;
    case Transform::DirichletScaled: j["transform"] = "dirichlet_scaled"; break;
    case Transform::SphereUniform: j["transform"] = "sphere_uniform"; break;
  }
  Json e;
  e["dist"] = entry_dist_name(m.entry.dist);
  if (m.entry.dist == EntryDist::ShiftedNormal) {
    e["mean"] = json_number(m.entry.mean);
    e["variance"] = json_number(m.entry.variance);
  }
  if (m.entry.dist == EntryDist::Poisson || m.entry.dist == EntryDist::CenteredPoisson) {
    e["lambda"] = json_number(m.entry.lambda);
  }
  j["entry"] = e;
  Json c;
  switch (m.covariance.kind) {
    case CovarianceKind::Identity: c["type"] = "identity"; break;
    case CovarianceKind::AR1:
      c["type"] = "ar1";
      c["rho"] = json_number(m.covariance.rho);
      break;
    case CovarianceKind::Banded:
      c["type"] = "banded";
      c["diag"] = json_number(m.covariance.diag);
      c["band"] = Json::array();
      for (double v : m.covariance.band_values) c["band"].push_back(json_number(v));
      break;
    case CovarianceKind::Explicit:
      c["type"] = "explicit";
      c["matrix"] = Json::array();
      for (long i = 0; i < m.covariance.matrix.rows(); ++i) {
        Json row = Json::array();
        for (long k = 0; k < m.covariance.matrix.cols(); ++k) row.push_back(json_number(m.covariance.matrix(i, k)));
        c["matrix"].push_back(row);
      }
      break;
  }
  j["covariance"] = c;
  Json mu;
  switch (m.mean.kind) {
    case MeanKind::Zero: mu["type"] = "zero"; break;
    case MeanKind::Constant:
      mu["type"] = "constant";
      mu["value"] = json_number(m.mean.value);
      break;
    case MeanKind::UniformNormSq:
      mu["type"] = "uniform_norm_sq";
      mu["value"] = json_number(m.mean.value);
      break;
    case MeanKind::Vector:
      mu["type"] = "vector";
      mu["values"] = Json::array();
      for (long k = 0; k < m.mean.vector.size(); ++k) mu["values"].push_back(json_number(m.mean.vector[k]));
      break;
  }
  j["mean"] = mu;
  return j;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = c.name;
  j["mode"] = mode_name(c.mode);
  j["model_x"] = to_json(c.model_x);
  j["model_y"] = to_json(c.model_y);
  j["kernels"] = Json::array();
  for (const KernelEntry& k : c.kernels) {
    j["kernels"].push_back(
        {{"label", k.label}, {"kernel", kernel_name(k.kernel)}, {"bandwidth", bandwidth_name(k.bandwidth)}});
  }
  j["grid"] = Json::array();
  for (const GridPoint& g : c.grid) j["grid"].push_back({{"n", g.n}, {"m", g.m}, {"p", g.p}});
  j["alphas"] = Json::array();
  for (double a : c.alphas) j["alphas"].push_back(json_number(a));
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["theory"] = {{"include_v12_v13", c.theory.include_v12_v13},
                 {"t1_reps", c.theory.t1_reps},
                 {"mmd_draws", c.theory.mmd_draws},
                 {"mmd_block", c.theory.mmd_block}};
  return j;
}

Json summary_json(const ExperimentResult& result) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = to_json(result.config);
  j["points"] = Json::array();
  for (const PointSummary& ps : result.points) {
    Json p;
    p["grid_index"] = ps.grid_index;
    p["n"] = ps.point.n;
    p["m"] = ps.point.m;
    p["p"] = ps.point.p;
    p["kernel"] = ps.kernel_label;
    p["bandwidth"] = json_number(ps.bandwidth);
    p["completed"] = ps.completed;
    p["failed"] = ps.failed;
    p["rates"] = Json::array();
    for (std::size_t a = 0; a < ps.rejection_rate.size(); ++a) {
      Json r;
      r["alpha"] = json_number(result.config.alphas[a]);
      r["rejection_rate"] = json_number(ps.rejection_rate[a]);
      r["ci99"] = pair_json(ps.rate_ci99[a]);
      if (a < ps.theory.size()) r["theory"] = to_json(ps.theory[a]);
      p["rates"].push_back(r);
    }
    p["ks_distance"] = ps.ks_distance ? json_number(*ps.ks_distance) : Json(nullptr);
    p["z_mean"] = json_number(ps.z_mean);
    p["z_variance"] = json_number(ps.z_variance);
    p["stat_mean"] = json_number(ps.stat_mean);
    p["stat_std_error"] = json_number(ps.stat_std_error);
    p["z_quantiles"] = Json::array();
    for (const auto& q : ps.z_quantiles) p["z_quantiles"].push_back(pair_json(q));
    if (ps.h1) p["h1"] = json_number(*ps.h1);
    if (ps.h2) p["h2"] = json_number(*ps.h2);
    j["points"].push_back(p);
  }
  return j;
}

// ---------------------------------------------------------------------------
// JSON in

ModelSpec model_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) cfg(field, "expected an object");
  ModelSpec m;
  if (const auto it = j.find("p"); it != j.end()) m.p = get_integer(*it, field + ".p");

  if (const auto it = j.find("transform"); it != j.end()) {
    const std::string t = get_string(*it, field + ".transform");
    if (t == "linear") m.transform = Transform::LinearMap;
    else if (t == "dirichlet_scaled") m.transform = Transform::DirichletScaled;
    else if (t == "sphere_uniform") m.transform = Transform::SphereUniform;
    else cfg(field + ".transform", "unknown transform '" + t + "'");
  }

  if (const auto it = j.find("entry"); it != j.end()) {
    const std::string f = field + ".entry";
    const Json& e = *it;
    const std::string dist = e.is_string() ? e.get<std::string>() : get_string(at(e, "dist", f), f + ".dist");
    if (dist == "std_normal") m.entry.dist = EntryDist::StdNormal;
    else if (dist == "centered_poisson") m.entry.dist = EntryDist::CenteredPoisson;
    else if (dist == "centered_exponential") m.entry.dist = EntryDist::CenteredExponential;
    else if (dist == "rademacher") m.entry.dist = EntryDist::Rademacher;
    else if (dist == "shifted_normal") m.entry.dist = EntryDist::ShiftedNormal;
    else if (dist == "poisson") m.entry.dist = EntryDist::Poisson;
    else cfg(f + ".dist", "unknown entry distribution '" + dist + "'");
    if (e.is_object()) {
      m.entry.mean = number_or(e, "mean", f, 0.0);
      m.entry.variance = number_or(e, "variance", f, 1.0);
      m.entry.lambda = number_or(e, "lambda", f, 1.0);
    }
  }

  if (const auto it = j.find("covariance"); it != j.end()) {
    const std::string f = field + ".covariance";
    const Json& c = *it;
    const std::string type = c.is_string() ? c.get<std::string>() : get_string(at(c, "type", f), f + ".type");
    if (type == "identity") {
      m.covariance.kind = CovarianceKind::Identity;
    } else if (type == "ar1") {
      m.covariance.kind = CovarianceKind::AR1;
      m.covariance.rho = get_number(at(c, "rho", f), f + ".rho");
    } else if (type == "banded") {
      m.covariance.kind = CovarianceKind::Banded;
      m.covariance.diag = number_or(c, "diag", f, 1.0);
      const Json& band = at(c, "band", f);
      if (!band.is_array()) cfg(f + ".band", "expected an array");
      for (std::size_t k = 0; k < band.size(); ++k) {
        m.covariance.band_values.push_back(get_number(band[k], f + ".band[" + std::to_string(k) + "]"));
      }
    } else if (type == "explicit") {
      m.covariance.kind = CovarianceKind::Explicit;
      const Json& rows = at(c, "matrix", f);
      if (!rows.is_array() || rows.empty()) cfg(f + ".matrix", "expected a non-empty array of rows");
      const long p = static_cast<long>(rows.size());
      m.covariance.matrix.resize(p, p);
      for (long i = 0; i < p; ++i) {
        const std::string rf = f + ".matrix[" + std::to_string(i) + "]";
        if (!rows[i].is_array() || static_cast<long>(rows[i].size()) != p) cfg(rf, "expected a row of length p");
        for (long k = 0; k < p; ++k) m.covariance.matrix(i, k) = get_number(rows[i][k], rf);
      }
      if (j.find("p") == j.end()) m.p = p;
    } else {
      cfg(f + ".type", "unknown covariance '" + type + "'");
    }
  }

  if (const auto it = j.find("mean"); it != j.end()) {
    const std::string f = field + ".mean";
    const Json& mu = *it;
    const std::string type = mu.is_string() ? mu.get<std::string>() : get_string(at(mu, "type", f), f + ".type");
    if (type == "zero") {
      m.mean.kind = MeanKind::Zero;
    } else if (type == "constant") {
      m.mean.kind = MeanKind::Constant;
      m.mean.value = get_number(at(mu, "value", f), f + ".value");
    } else if (type == "uniform_norm_sq") {
      m.mean.kind = MeanKind::UniformNormSq;
      m.mean.value = get_number(at(mu, "value", f), f + ".value");
    } else if (type == "vector") {
      m.mean.kind = MeanKind::Vector;
      const Json& values = at(mu, "values", f);
      if (!values.is_array()) cfg(f + ".values", "expected an array");
      m.mean.vector.resize(static_cast<long>(values.size()));
      for (std::size_t k = 0; k < values.size(); ++k) {
        m.mean.vector[static_cast<long>(k)] = get_number(values[k], f + ".values[" + std::to_string(k) + "]");
      }
      if (j.find("p") == j.end()) m.p = static_cast<long>(values.size());
    } else {
      cfg(f + ".type", "unknown mean '" + type + "'");
    }
  }

  try {
    m.validate();
  } catch (const Error& e) {
    cfg(field, e.what());
  }
  return m;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) cfg("config", "expected an object");
  if (const auto it = j.find("schema_version"); it != j.end() && get_string(*it, "schema_version") != kSchemaVersion) {
    cfg("schema_version", std::string("expected ") + kSchemaVersion);
  }
  ExperimentConfig c;
  if (const auto it = j.find("name"); it != j.end()) c.name = get_string(*it, "name");
  const std::string mode = get_string(at(j, "mode", "config"), "mode");
  if (mode == "null_calibration") c.mode = ExperimentMode::NullCalibration;
  else if (mode == "power_curve") c.mode = ExperimentMode::PowerCurve;
  else if (mode == "kernel_impact") c.mode = ExperimentMode::KernelImpact;
  else cfg("mode", "unknown mode '" + mode + "'");

  c.model_x = model_from_json(at(j, "model_x", "config"), "model_x");
  c.model_y = j.contains("model_y") ? model_from_json(j["model_y"], "model_y") : c.model_x;

  const Json& kernels = at(j, "kernels", "config");
  if (!kernels.is_array() || kernels.empty()) cfg("kernels", "expected a non-empty array");
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    c.kernels.push_back(kernel_entry_from_json(kernels[k], "kernels[" + std::to_string(k) + "]"));
  }

  const Json& grid = at(j, "grid", "config");
  if (grid.is_array()) {
    if (grid.empty()) cfg("grid", "must not be empty");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::string f = "grid[" + std::to_string(g) + "]";
      GridPoint gp;
      gp.n = get_integer(at(grid[g], "n", f), f + ".n");
      gp.m = grid[g].contains("m") ? get_integer(grid[g]["m"], f + ".m") : gp.n;
      gp.p = get_integer(at(grid[g], "p", f), f + ".p");
      c.grid.push_back(gp);
    }
  } else if (grid.is_object()) {
    // {"p": 200, "d": [0.5, 0.55, ...]} with n = m = round(p^d).
    const long p = get_integer(at(grid, "p", "grid"), "grid.p");
    const Json& ds = at(grid, "d", "grid");
    if (!ds.is_array() || ds.empty()) cfg("grid.d", "expected a non-empty array");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const double d = get_number(ds[k], "grid.d[" + std::to_string(k) + "]");
      const long n = std::lround(std::pow(static_cast<double>(p), d));
      c.grid.push_back({n, n, p});
    }
  } else {
    cfg("grid", "expected an array of points or a {p, d} object");
  }

  if (const auto it = j.find("alphas"); it != j.end()) {
    if (!it->is_array()) cfg("alphas", "expected an array");
    c.alphas.clear();
    for (std::size_t a = 0; a < it->size(); ++a) c.alphas.push_back(get_number((*it)[a], "alphas"));
  }
  if (const auto it = j.find("replicates"); it != j.end()) c.replicates = get_integer(*it, "replicates");
  if (const auto it = j.find("seed"); it != j.end()) c.seed = seed_from_json(*it, "seed");
  if (const auto it = j.find("threads"); it != j.end()) c.threads = static_cast<int>(get_integer(*it, "threads"));
  if (const auto it = j.find("theory"); it != j.end()) {
    const Json& t = *it;
    if (!t.is_object()) cfg("theory", "expected an object");
    if (t.contains("include_v12_v13")) {
      if (!t["include_v12_v13"].is_boolean()) cfg("theory.include_v12_v13", "expected a boolean");
      c.theory.include_v12_v13 = t["include_v12_v13"].get<bool>();
    }
    if (t.contains("t1_reps")) c.theory.t1_reps = get_integer(t["t1_reps"], "theory.t1_reps");
    if (t.contains("mmd_draws")) c.theory.mmd_draws = get_integer(t["mmd_draws"], "theory.mmd_draws");
    if (t.contains("mmd_block")) c.theory.mmd_block = get_integer(t["mmd_block"], "theory.mmd_block");
  }

  // Models without an explicit p take the first grid dimension.
  if (j["model_x"].find("p") == j["model_x"].end()) c.model_x = c.model_x.with_dimension(c.grid.front().p);
  if (!j.contains("model_y") || j["model_y"].find("p") == j["model_y"].end()) {
    c.model_y = c.model_y.with_dimension(c.grid.front().p);
  }
  c.validate();
  return c;
}

ReducedSummary summary_from_json(const Json& j, const std::string& field) {
  ReducedSummary s;
  s.p = get_integer(at(j, "p", field), field + ".p");
  s.tr1 = get_number(at(j, "tr1", field), field + ".tr1");
  s.tr2 = get_number(at(j, "tr2", field), field + ".tr2");
  s.delta_sq = number_or(j, "delta_sq", field, 0.0);
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (const auto it = j.find(key); it != j.end()) out = get_number(*it, field + "." + key);
  };
  opt("tr1_sq", s.tr1_sq);
  opt("tr2_sq", s.tr2_sq);
  opt("tr12", s.tr12);
  opt("frob_diff_sq", s.frob_diff_sq);
  opt("delta_s1_delta", s.delta_s1_delta);
  opt("delta_s2_delta", s.delta_s2_delta);
  s.kurtosis_term1 = number_or(j, "kurtosis_term1", field, 0.0);
  s.kurtosis_term2 = number_or(j, "kurtosis_term2", field, 0.0);
  if (const auto it = j.find("gaussian"); it != j.end()) {
    if (!it->is_boolean()) cfg(field + ".gaussian", "expected a boolean");
    s.gaussian = it->get<bool>();
  }
  try {
    s.validate();
  } catch (const Error& e) {
    cfg(field, e.what());
  }
  return s;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) cfg(path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    cfg(path, std::string("invalid JSON: ") + e.what());
  }
}

void write_experiment_outputs(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / "summary.json", std::ios::binary);
    out << summary_json(result).dump(2) << '\n';
  }
  const auto& cfgv = result.config;
  {
    std::ofstream out(base / "replicates.csv", std::ios::binary);
    out << "grid_index,n,m,p,kernel,replicate,bandwidth,statistic,var_hat,z_score,p_value";
    for (double a : cfgv.alphas) out << ",reject_" << format_number(a);
    out << ",failed\n";
    for (const ReplicateRecord& r : result.records) {
      const GridPoint& g = cfgv.grid[r.grid_index];
      out << r.grid_index << ',' << g.n << ',' << g.m << ',' << g.p << ',' << cfgv.kernels[r.kernel_index].label << ','
          << r.replicate << ',' << csv_number(r.bandwidth) << ',' << csv_number(r.statistic) << ','
          << csv_number(r.var_hat) << ',' << csv_number(r.z_score) << ',' << csv_number(r.p_value);
      for (bool rej : r.reject) out << ',' << (rej ? 1 : 0);
      out << ',' << (r.failed ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(base / "qq.csv", std::ios::binary);
    out << "grid_index,kernel,rank,theoretical,z_score\n";
    const long kernels = static_cast<long>(cfgv.kernels.size());
    for (long g = 0; g < static_cast<long>(cfgv.grid.size()); ++g) {
      for (long k = 0; k < kernels; ++k) {
        std::vector<double> z;
        for (const ReplicateRecord& r : result.records) {
          if (r.grid_index == g && r.kernel_index == k && !r.failed) z.push_back(r.z_score);
        }
        std::sort(z.begin(), z.end());
        const double count = static_cast<double>(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
          const double q = normal_quantile((static_cast<double>(i) + 0.5) / count);
          out << g << ',' << cfgv.kernels[k].label << ',' << (i + 1) << ',' << format_number(q) << ','
              << csv_number(z[i]) << '\n';
        }
      }
    }
  }
}

}  // namespace hdmmd
