#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mml {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error("line " + std::to_string(line_no) + ": non-numeric " +
                      what + " value '" + s + "'");
  }
}

int parse_int(const std::string& s, int line_no, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw parse_error("line " + std::to_string(line_no) + ": non-integer " +
                      what + " value '" + s + "'");
  return v;
}

nlohmann::json double_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

PanelDataset read_panel_csv(const std::string& path,
                            const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "t" ||
      header[2] != "y")
    throw parse_error(path + ": header must be id,t,y,x1,...,xp");
  const int p_in = static_cast<int>(header.size()) - 3;

  struct Row {
    int t;
    int y;
    std::vector<double> x;
    int line_no;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> by_id;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) != p_in + 3)
      throw parse_error("line " + std::to_string(line_no) +
                        ": expected " + std::to_string(p_in + 3) + " fields");
    Row row;
    row.line_no = line_no;
    row.t = parse_int(f[1], line_no, "t");
    row.y = parse_int(f[2], line_no, "y");
    if (row.t < 1)
      throw parse_error("line " + std::to_string(line_no) + ": t must be >= 1");
    if (row.y < 1)
      throw parse_error("line " + std::to_string(line_no) + ": y must be >= 1");
    row.x.resize(p_in);
    for (int j = 0; j < p_in; ++j)
      row.x[j] = parse_double(f[3 + j], line_no, "covariate");
    auto it = by_id.find(f[0]);
    if (it == by_id.end()) {
      order.push_back(f[0]);
      it = by_id.emplace(f[0], std::vector<Row>{}).first;
    }
    for (const Row& r : it->second)
      if (r.t == row.t)
        throw parse_error("line " + std::to_string(line_no) +
                          ": duplicate (id,t) = (" + f[0] + "," + f[1] + ")");
    it->second.push_back(std::move(row));
  }
  if (order.empty()) throw parse_error(path + ": no data rows");

  const int T = static_cast<int>(by_id[order.front()].size());
  for (const std::string& id : order) {
    auto& rows = by_id[id];
    if (static_cast<int>(rows.size()) != T)
      throw parse_error("ragged panel: id '" + id + "' has " +
                        std::to_string(rows.size()) + " rows, expected " +
                        std::to_string(T));
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.t < b.t; });
    for (int t = 1; t <= T; ++t)
      if (rows[t - 1].t != t)
        throw parse_error("ragged panel: id '" + id + "' is missing t = " +
                          std::to_string(t));
  }
  if (T < 2) throw parse_error(path + ": need at least 2 time points");

  bool has_intercept = true;
  for (const std::string& id : order)
    for (const auto& row : by_id[id])
      if (row.x.empty() || row.x[0] != 1.0) has_intercept = false;
  const bool prepend = options.add_intercept && !has_intercept;
  const int p = p_in + (prepend ? 1 : 0);

  PanelDataset data;
  data.n = static_cast<int>(order.size());
  data.T = T;
  data.p = p;
  data.ids = order;
  data.y.resize(static_cast<std::size_t>(data.n) * T);
  data.x.resize(static_cast<std::size_t>(data.n) * T * p);
  for (int i = 0; i < data.n; ++i) {
    const auto& rows = by_id[order[i]];
    for (int t = 1; t <= T; ++t) {
      const Row& row = rows[t - 1];
      data.y[static_cast<std::size_t>(i) * T + t - 1] = row.y;
      double* x = &data.x[(static_cast<std::size_t>(i) * T + t - 1) * p];
      if (prepend) {
        x[0] = 1.0;
        for (int j = 0; j < p_in; ++j) x[j + 1] = row.x[j];
      } else {
        for (int j = 0; j < p_in; ++j) x[j] = row.x[j];
      }
    }
  }
  return data;
}

void write_panel_csv(const PanelDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "id,t,y";
  for (int j = 1; j <= data.p; ++j) out << ",x" << j;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < data.n; ++i) {
    const std::string id =
        data.ids.empty() ? std::to_string(i + 1) : data.ids[i];
    for (int t = 1; t <= data.T; ++t) {
      out << id << ',' << t << ',' << data.state(i, t);
      for (double v : data.covariates(i, t)) out << ',' << v;
      out << "\n";
    }
  }
  if (!out) throw parse_error("write failed for '" + path + "'");
}

void write_labels_csv(const PanelDataset& data,
                      const std::vector<int>& labels,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "id,group\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string id =
        data.ids.empty() ? std::to_string(i + 1) : data.ids[i];
    out << id << ',' << labels[i] << "\n";
  }
}

void write_assignments_csv(const PanelDataset& data,
                           const ClusterResult& result,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "id,group";
  for (int l = 1; l <= result.posterior.L; ++l) out << ",posterior" << l;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < result.posterior.n; ++i) {
    const std::string id =
        data.ids.empty() ? std::to_string(i + 1) : data.ids[i];
    out << id << ',' << result.assignment[i];
    for (int l = 1; l <= result.posterior.L; ++l)
      out << ',' << result.posterior.at(i, l);
    out << "\n";
  }
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return {{"K", spec.K}, {"L", spec.L}, {"p", spec.p}, {"active", spec.active}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.K = j.at("K").get<int>();
  spec.L = j.at("L").get<int>();
  spec.p = j.at("p").get<int>();
  spec.active = j.at("active").get<std::vector<int>>();
  spec.validate();
  return spec;
}

nlohmann::json params_to_json(const ParameterSet& theta) {
  nlohmann::json alpha = nlohmann::json::array();
  for (int l = 1; l <= theta.L; ++l)
    for (int u = 1; u <= theta.K; ++u)
      for (int v = 2; v <= theta.K; ++v) {
        const double* a = theta.coeff(u, v, l);
        alpha.push_back({{"u", u},
                         {"v", v},
                         {"l", l},
                         {"coef", std::vector<double>(a, a + theta.p)}});
      }
  return {{"K", theta.K}, {"L", theta.L}, {"p", theta.p},
          {"pi", theta.pi}, {"alpha", alpha}};
}

ParameterSet params_from_json(const nlohmann::json& j) {
  ModelSpec dims;
  dims.K = j.at("K").get<int>();
  dims.L = j.at("L").get<int>();
  dims.p = j.at("p").get<int>();
  dims.active.resize(dims.p);
  for (int i = 0; i < dims.p; ++i) dims.active[i] = i + 1;
  ParameterSet theta = ParameterSet::zeros(dims);
  theta.pi = j.at("pi").get<std::vector<double>>();
  for (const auto& entry : j.at("alpha")) {
    int u = entry.at("u").get<int>();
    int v = entry.at("v").get<int>();
    int l = entry.at("l").get<int>();
    auto coef = entry.at("coef").get<std::vector<double>>();
    if (u < 1 || u > dims.K || v < 2 || v > dims.K || l < 1 || l > dims.L ||
        static_cast<int>(coef.size()) != dims.p)
      throw parse_error("parameter json: bad alpha entry");
    std::copy(coef.begin(), coef.end(), theta.coeff(u, v, l));
  }
  return theta;
}

nlohmann::json fit_to_json(const FitResult& fit, const ModelSpec& spec,
                           std::uint64_t seed) {
  return {{"version", kToolVersion},
          {"seed", seed},
          {"spec", spec_to_json(spec)},
          {"parameters", params_to_json(fit.theta)},
          {"loglik", fit.loglik},
          {"trace", fit.trace},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"restarts_used", fit.restarts_used},
          {"degenerate_blocks", fit.degenerate_blocks}};
}

std::pair<FitResult, ModelSpec> fit_from_json(const nlohmann::json& j) {
  FitResult fit;
  ModelSpec spec = spec_from_json(j.at("spec"));
  fit.theta = params_from_json(j.at("parameters"));
  fit.loglik = j.at("loglik").get<double>();
  fit.trace = j.at("trace").get<std::vector<double>>();
  fit.iterations = j.at("iterations").get<int>();
  fit.converged = j.at("converged").get<bool>();
  fit.restarts_used = j.at("restarts_used").get<int>();
  fit.degenerate_blocks = j.value("degenerate_blocks", 0);
  return {std::move(fit), std::move(spec)};
}

nlohmann::json trace_to_json(const SelectionTrace& trace,
                             const ModelSpec& spec, int T1,
                             std::uint64_t seed) {
  nlohmann::json steps = nlohmann::json::array();
  for (const SelectionStep& s : trace.steps) {
    nlohmann::json scores = nlohmann::json::array();
    for (double v : s.train_ll) scores.push_back(double_or_null(v));
    steps.push_back({{"candidates", s.candidates},
                     {"train_loglik", scores},
                     {"chosen", s.chosen},
                     {"holdout_loglik", double_or_null(s.holdout_ll)},
                     {"accepted", s.accepted}});
  }
  nlohmann::json out = {
      {"version", kToolVersion},
      {"seed", seed},
      {"spec", spec_to_json(spec)},
      {"T1", T1},
      {"final_set", trace.final_set},
      {"stop_reason", trace.stop_reason == StopReason::kHeldOutDecrease
                          ? "held-out-decrease"
                          : "exhausted-candidates"},
      {"base_train_loglik", trace.base_train_ll},
      {"base_holdout_loglik", trace.base_holdout_ll},
      {"steps", steps}};
  if (trace.refit) {
    ModelSpec refit_spec = spec;
    refit_spec.active = trace.final_set;
    out["refit"] = fit_to_json(*trace.refit, refit_spec, seed);
  }
  return out;
}

nlohmann::json generator_config_to_json(const GeneratorConfig& config) {
  nlohmann::json covs = nlohmann::json::array();
  for (const CovariateSpec& c : config.covariates) {
    if (c.kind == CovariateSpec::Kind::kConstant)
      covs.push_back({{"type", "constant"}});
    else
      covs.push_back({{"type", "normal"}, {"mean", c.mean}, {"sd", c.sd}});
  }
  return {{"group_sizes", config.group_sizes},
          {"T", config.T},
          {"K", config.K},
          {"covariates", covs},
          {"parameters", params_to_json(config.theta)},
          {"initial_state", config.initial_state},
          {"seed", config.seed}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig config;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset != "table1")
      throw parse_error("unknown generator preset '" + preset + "'");
    config = table1_preset();
  }
  if (j.contains("group_sizes"))
    config.group_sizes = j.at("group_sizes").get<std::vector<int>>();
  if (j.contains("T")) config.T = j.at("T").get<int>();
  if (j.contains("K")) config.K = j.at("K").get<int>();
  if (j.contains("covariates")) {
    config.covariates.clear();
    for (const auto& c : j.at("covariates")) {
      CovariateSpec cs;
      const std::string type = c.at("type").get<std::string>();
      if (type == "constant") {
        cs.kind = CovariateSpec::Kind::kConstant;
      } else if (type == "normal") {
        cs.kind = CovariateSpec::Kind::kNormal;
        cs.mean = c.value("mean", 0.0);
        cs.sd = c.value("sd", 1.0);
      } else {
        throw parse_error("unknown covariate type '" + type + "'");
      }
      config.covariates.push_back(cs);
    }
  }
  if (j.contains("parameters"))
    config.theta = params_from_json(j.at("parameters"));
  if (j.contains("initial_state"))
    config.initial_state = j.at("initial_state").get<std::vector<double>>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw parse_error("write failed for '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

}  // namespace mml
