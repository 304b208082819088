#include "icapath/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "icapath/errors.hpp"

namespace icapath {

using nlohmann::json;

std::string version_string() { return "0.1.0"; }

std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool after_quote = false;
  long line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
    after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(record);
    record.clear();
  };

  char c = 0;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
      ++line;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c == '"') {
      if (field_started || after_quote) {
        throw DataError("CSV line " + std::to_string(line) +
                        ": stray quote inside an unquoted field");
      }
      in_quotes = true;
      field_started = true;
    } else {
      if (after_quote) {
        throw DataError("CSV line " + std::to_string(line) +
                        ": text after a closing quote");
      }
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("CSV ends inside a quoted field");
  if (field_started || after_quote || !record.empty()) end_record();
  return records;
}

namespace {

bool parse_cell(const std::string& raw, double& out) {
  const auto first = raw.find_first_not_of(" \t");
  if (first == std::string::npos) return false;
  const auto last = raw.find_last_not_of(" \t");
  const std::string s = raw.substr(first, last - first + 1);
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& response) {
  const auto records = parse_csv_records(in);
  if (records.empty()) throw DataError("CSV is empty (a header row is required)");
  const auto& header = records[0];
  const std::size_t width = header.size();

  std::size_t y_col = width;
  for (std::size_t c = 0; c < width; ++c) {
    if (header[c] == response) {
      if (y_col != width) throw DataError("duplicate response column '" + response + "'");
      y_col = c;
    }
  }
  if (y_col == width) {
    throw DataError("CSV header has no response column named '" + response + "'");
  }
  if (width < 2) throw DataError("CSV has no predictor columns");
  const std::size_t n = records.size() - 1;
  if (n == 0) throw DataError("CSV has a header but no data rows");

  CsvTable table;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != y_col) table.predictor_names.push_back(header[c]);
  }
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - 1));
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t r = 1; r <= n; ++r) {
    const auto& rec = records[r];
    if (rec.size() != width) {
      throw DataError("CSV row " + std::to_string(r) + ": expected " +
                      std::to_string(width) + " fields, found " +
                      std::to_string(rec.size()));
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!parse_cell(rec[c], v)) {
        throw DataError("CSV row " + std::to_string(r) + ", column " +
                        std::to_string(c + 1) + " ('" + header[c] +
                        "'): non-numeric value '" + rec[c] + "'");
      }
      const auto i = static_cast<Eigen::Index>(r - 1);
      if (c == y_col) {
        y[i] = v;
      } else {
        x(i, col++) = v;
      }
    }
  }
  table.data = Dataset(std::move(x), std::move(y));
  return table;
}

CsvTable read_csv_file(const std::string& path, const std::string& response) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, response);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunManifest make_manifest(const std::string& command,
                          const std::string& settings, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config_digest = fnv1a_hex(settings);
  m.seed = seed;
  m.version = version_string();
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream ts;
  ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  m.timestamp = ts.str();
  return m;
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},   {"config_digest", m.config_digest},
          {"seed", m.seed},         {"version", m.version},
          {"timestamp", m.timestamp}};
}

Vector StoredPath::fitted_coefficients(std::size_t k) const {
  return coefficients.at(k).cwiseProduct(column_scales);
}

namespace {

json family_json(const FamilySpec& fam) {
  return {{"name", fam.name()}, {"dispersion", fam.dispersion()}};
}

json penalty_json(const PenaltySpec& pen) {
  json j = {{"name", pen.name()}};
  if (pen.kind() != PenaltyKind::L1) j["a"] = pen.a();
  return j;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("path JSON lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("path JSON field '") + key + "' has the wrong type");
  }
}

}  // namespace

json path_to_json(const PathResult& path, const FamilySpec& fam,
                  const PenaltySpec& pen, const SolverConfig& cfg,
                  const std::vector<std::string>& names,
                  const RunManifest& manifest) {
  json j;
  j["manifest"] = to_json(manifest);
  j["family"] = family_json(fam);
  j["penalty"] = penalty_json(pen);
  j["lambdas"] = path.lambdas;
  j["p"] = path.p();
  j["predictors"] = names;
  j["standardized"] = path.standardized;
  j["column_scales"] = std::vector<double>(
      path.column_scales.data(), path.column_scales.data() + path.p());
  j["stopped_early"] = path.stopped_early;
  j["solver"] = {{"tol", cfg.tol},
                 {"max_sweeps", cfg.max_sweeps},
                 {"nlambda", cfg.nlambda},
                 {"lambda_min_ratio", cfg.lambda_min_ratio}};
  json fits = json::array();
  for (const auto& pt : path.points) {
    json coef = json::object();
    for (SparseVector::InnerIterator it(pt.coefficients); it; ++it) {
      coef[std::to_string(it.index())] = it.value();
    }
    fits.push_back({{"lambda", pt.lambda},
                    {"coefficients", coef},
                    {"loglik", pt.loglik},
                    {"deviance", pt.deviance},
                    {"support_size", pt.support_size},
                    {"converged", pt.converged},
                    {"sweeps_used", pt.sweeps_used},
                    {"penalized_objective", pt.penalized_objective},
                    {"ascent_violations", pt.ascent_violations}});
  }
  j["fits"] = fits;
  return j;
}

StoredPath path_from_json(const json& j) {
  if (!j.is_object()) throw DataError("path JSON must be an object");
  StoredPath sp;
  const json fam = field<json>(j, "family");
  sp.family = FamilySpec(parse_family_kind(field<std::string>(fam, "name")),
                         fam.value("dispersion", 1.0));
  const json pen = field<json>(j, "penalty");
  const PenaltyKind kind = parse_penalty_kind(field<std::string>(pen, "name"));
  sp.penalty = PenaltySpec(kind, pen.value("a", PenaltySpec::kDefaultScadA));
  sp.lambdas = field<std::vector<double>>(j, "lambdas");
  const auto p = field<Eigen::Index>(j, "p");
  if (p < 1) throw DataError("path JSON has p < 1");
  if (j.contains("predictors")) {
    sp.predictor_names = field<std::vector<std::string>>(j, "predictors");
  }
  if (sp.predictor_names.size() != static_cast<std::size_t>(p)) {
    sp.predictor_names.clear();
    for (Eigen::Index c = 0; c < p; ++c) {
      sp.predictor_names.push_back("x" + std::to_string(c + 1));
    }
  }
  sp.standardized = j.value("standardized", false);
  sp.column_scales = Vector::Ones(p);
  if (j.contains("column_scales")) {
    const auto s = field<std::vector<double>>(j, "column_scales");
    if (s.size() != static_cast<std::size_t>(p)) {
      throw DataError("path JSON column_scales has the wrong length");
    }
    for (Eigen::Index c = 0; c < p; ++c) sp.column_scales[c] = s[static_cast<std::size_t>(c)];
  }
  if (j.contains("solver")) {
    sp.tol = j["solver"].value("tol", sp.tol);
    sp.max_sweeps = j["solver"].value("max_sweeps", sp.max_sweeps);
  }
  for (const json& fit : field<json>(j, "fits")) {
    Vector beta = Vector::Zero(p);
    const json coef = field<json>(fit, "coefficients");
    if (!coef.is_object()) throw DataError("fit coefficients must be an object");
    for (const auto& [key, value] : coef.items()) {
      Eigen::Index idx = -1;
      try {
        idx = static_cast<Eigen::Index>(std::stoll(key));
      } catch (const std::exception&) {
      }
      if (idx < 0 || idx >= p) throw DataError("coefficient index '" + key + "' out of range");
      if (!value.is_number()) throw DataError("coefficient '" + key + "' is not a number");
      beta[idx] = value.get<double>();
    }
    sp.coefficients.push_back(std::move(beta));
    sp.loglik.push_back(fit.value("loglik", std::nan("")));
    sp.deviance.push_back(fit.value("deviance", std::nan("")));
    sp.converged.push_back(fit.value("converged", false));
  }
  if (sp.coefficients.size() > sp.lambdas.size()) {
    throw DataError("path JSON has more fits than lambdas");
  }
  return sp;
}

json to_json(const SelectionResult& sel) {
  json j = {{"criterion", criterion_name(sel.criterion)},
            {"chosen_index", sel.chosen_index},
            {"chosen_lambda", sel.chosen_lambda},
            {"scores", sel.scores}};
  if (sel.size_penalty) j["size_penalty"] = *sel.size_penalty;
  return j;
}

json to_json(const OptimalityReport& r) {
  json j = {{"lambda", r.lambda},
            {"support_size", r.support_size},
            {"stationarity_residual", r.stationarity_residual},
            {"z_inf", r.z_inf},
            {"z_bound", r.z_bound},
            {"passes_strict", r.passes_strict},
            {"passes_nonstrict", r.passes_nonstrict}};
  j["eigen_margin"] = r.eigen_margin ? json(*r.eigen_margin) : json(nullptr);
  j["coordinatewise_margin"] =
      r.coordinatewise_margin ? json(*r.coordinatewise_margin) : json(nullptr);
  return j;
}

json to_json(const GlobalCheckReport& r) {
  json j = {{"kappa", r.kappa},
            {"min_eigenvalue", r.min_eigenvalue},
            {"pointwise_convexity_margin", r.pointwise_convexity_margin},
            {"exact", r.exact},
            {"surrogate", !r.exact},
            {"rank_deficient", r.rank_deficient},
            {"margin_holds", r.margin_holds},
            {"min_abs_coef", r.min_abs_coef},
            {"robustness_passes", r.robustness_passes}};
  j["c0"] = r.c0 ? json(*r.c0) : json(nullptr);
  j["scad_robustness_threshold"] =
      r.scad_robustness_threshold ? json(*r.scad_robustness_threshold) : json(nullptr);
  return j;
}

namespace {

struct NamedStat {
  const char* name;
  const MetricStat MethodSummary::*stat;
};

constexpr NamedStat kStats[] = {
    {"pe", &MethodSummary::pe},
    {"l2_loss", &MethodSummary::l2_loss},
    {"l1_loss", &MethodSummary::l1_loss},
    {"deviance", &MethodSummary::deviance},
    {"n_selected", &MethodSummary::n_selected},
    {"false_negatives", &MethodSummary::false_negatives},
};

}  // namespace

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,replicates,failures";
  for (const auto& s : kStats) out << ',' << s.name << "_median," << s.name << "_robust_sd";
  out << ",half_min_signal\n";
  out << std::setprecision(10);
  for (const auto& m : result.methods) {
    out << m.method << ',' << m.replicates.size() << ',' << m.failures;
    for (const auto& s : kStats) {
      out << ',' << (m.*s.stat).median << ',' << (m.*s.stat).robust_sd;
    }
    out << ',' << result.half_min_signal << '\n';
  }
}

json to_json(const ExperimentResult& result) {
  json methods = json::array();
  for (const auto& m : result.methods) {
    json row = {{"method", m.method},
                {"replicates", m.replicates.size()},
                {"failures", m.failures}};
    for (const auto& s : kStats) {
      row[s.name] = {{"median", (m.*s.stat).median},
                     {"robust_sd", (m.*s.stat).robust_sd}};
    }
    row["optimality"] = {{"path_points", m.path_points},
                         {"nonconverged_points", m.nonconverged_points},
                         {"ascent_violations", m.ascent_violations},
                         {"cv_ascent_violations", m.cv_ascent_violations},
                         {"local_max_checked", m.local_max_checked},
                         {"local_max_failures", m.local_max_failures},
                         {"local_max_kappa_only", m.local_max_kappa_only},
                         {"local_max_kappa_only_coordinatewise_ok",
                          m.local_max_kappa_only_coordinatewise_ok},
                         {"worst_stationarity", m.worst_stationarity},
                         {"l1_kkt_checked", m.l1_kkt_checked},
                         {"l1_kkt_failures", m.l1_kkt_failures},
                         {"worst_l1_kkt", m.worst_l1_kkt}};
    json reps = json::array();
    for (std::size_t r = 0; r < m.replicates.size(); ++r) {
      const SimMetrics& x = m.replicates[r];
      reps.push_back({{"replicate", m.replicate_index[r]},
                      {"pe", x.pe},
                      {"l2_loss", x.l2_loss},
                      {"l1_loss", x.l1_loss},
                      {"deviance", x.deviance},
                      {"n_selected", x.n_selected},
                      {"false_negatives", x.false_negatives}});
    }
    row["per_replicate"] = reps;
    methods.push_back(row);
  }
  return {{"robust_sd", "IQR/1.349"},
          {"half_min_signal", result.half_min_signal},
          {"seconds", result.seconds},
          {"methods", methods}};
}

void write_plot_csv(std::ostream& out, const StoredPath& path) {
  out << "lambda";
  for (const auto& name : path.predictor_names) {
    const bool quote = name.find_first_of(",\"\r\n") != std::string::npos;
    if (!quote) {
      out << ',' << name;
      continue;
    }
    out << ",\"";
    for (char c : name) out << (c == '"' ? "\"\"" : std::string(1, c));
    out << '"';
  }
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < path.coefficients.size(); ++k) {
    out << path.lambdas[k];
    const Vector& b = path.coefficients[k];
    for (Eigen::Index c = 0; c < b.size(); ++c) out << ',' << b[c];
    out << '\n';
  }
}

}  // namespace icapath
