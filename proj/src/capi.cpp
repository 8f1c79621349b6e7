#include "mmlogit/mmlogit.h"

#include <cstring>
#include <numeric>
#include <string>

#include "cluster.hpp"
#include "em.hpp"
#include "io.hpp"
#include "model.hpp"
#include "simgen.hpp"
#include "study.hpp"
#include "util.hpp"
#include "varsel.hpp"

struct mml_dataset {
  mml::PanelDataset data;
};

struct mml_model {
  mml::FitResult fit;
  mml::ModelSpec spec;
  std::uint64_t seed = 0;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return MML_OK;
  } catch (const mml::invalid_input& e) {
    return fail(MML_ERR_INVALID, e.what());
  } catch (const mml::parse_error& e) {
    return fail(MML_ERR_INVALID, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MML_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(MML_ERR_RUNTIME, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

struct FitConfig {
  mml::ModelSpec spec;
  mml::EmOptions em;
  int T1 = 0;
  bool refit = false;
  int window_end = 0;
};

FitConfig parse_fit_options(const nlohmann::json& j, const mml::PanelDataset& data) {
  FitConfig cfg;
  cfg.spec.K = j.at("K").get<int>();
  cfg.spec.L = j.at("L").get<int>();
  cfg.spec.p = data.p;
  if (j.contains("active")) {
    cfg.spec.active = j.at("active").get<std::vector<int>>();
  } else {
    cfg.spec.active.resize(data.p);
    std::iota(cfg.spec.active.begin(), cfg.spec.active.end(), 1);
  }
  cfg.em.max_iter = j.value("max_iter", cfg.em.max_iter);
  cfg.em.rel_tol = j.value("rel_tol", cfg.em.rel_tol);
  cfg.em.n_restarts = j.value("n_restarts", cfg.em.n_restarts);
  cfg.em.seed = j.value("seed", std::uint64_t{0});
  cfg.em.threads = j.value("threads", 0);
  cfg.T1 = j.value("T1", 0);
  cfg.refit = j.value("refit", false);
  cfg.window_end = j.value("window_end", data.T);
  cfg.spec.validate();
  cfg.em.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* mml_version(void) { return mml::kToolVersion; }

const char* mml_last_error(void) { return g_last_error.c_str(); }

void mml_string_free(char* s) { std::free(s); }
void mml_ints_free(int* v) { std::free(v); }
void mml_doubles_free(double* v) { std::free(v); }

int mml_dataset_read_csv(const char* path, int add_intercept,
                         mml_dataset** out) {
  if (!path || !out) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    mml::CsvOptions opts;
    opts.add_intercept = add_intercept != 0;
    auto* handle = new mml_dataset{mml::read_panel_csv(path, opts)};
    *out = handle;
  });
}

int mml_dataset_write_csv(const mml_dataset* data, const char* path) {
  if (!data || !path) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] { mml::write_panel_csv(data->data, path); });
}

int mml_dataset_dims(const mml_dataset* data, int* n, int* T, int* p) {
  if (!data) return fail(MML_ERR_INVALID, "null dataset");
  if (n) *n = data->data.n;
  if (T) *T = data->data.T;
  if (p) *p = data->data.p;
  return MML_OK;
}

int mml_dataset_id(const mml_dataset* data, int i, const char** id_out) {
  if (!data || !id_out) return fail(MML_ERR_INVALID, "null argument");
  if (i < 0 || i >= data->data.n)
    return fail(MML_ERR_INVALID, "individual index out of range");
  static thread_local std::string fallback;
  if (data->data.ids.empty()) {
    fallback = std::to_string(i + 1);
    *id_out = fallback.c_str();
  } else {
    *id_out = data->data.ids[i].c_str();
  }
  return MML_OK;
}

void mml_dataset_free(mml_dataset* data) { delete data; }

int mml_simulate(const char* config_json, mml_dataset** data_out,
                 int** truth_out, int* n_out, char** theta_json_out) {
  if (!config_json || !data_out) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(config_json);
    mml::GeneratorConfig config = mml::generator_config_from_json(j);
    mml::SimulatedPanel sim = mml::generate(config);
    if (truth_out) {
      int* labels = static_cast<int*>(std::malloc(sizeof(int) * sim.truth.size()));
      std::copy(sim.truth.begin(), sim.truth.end(), labels);
      *truth_out = labels;
    }
    if (n_out) *n_out = sim.data.n;
    if (theta_json_out)
      *theta_json_out = dup_string(mml::params_to_json(sim.theta).dump(2));
    *data_out = new mml_dataset{std::move(sim.data)};
  });
}

int mml_fit(const mml_dataset* data, const char* options_json,
            mml_model** out) {
  if (!data || !options_json || !out)
    return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(options_json);
    FitConfig cfg = parse_fit_options(j, data->data);
    mml::TimeWindow window{1, cfg.window_end};
    mml::FitResult fit = mml::fit(data->data, cfg.spec, cfg.em, window);
    *out = new mml_model{std::move(fit), cfg.spec, cfg.em.seed};
  });
}

int mml_model_to_json(const mml_model* model, char** json_out) {
  if (!model || !json_out) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    *json_out =
        dup_string(mml::fit_to_json(model->fit, model->spec, model->seed).dump(2));
  });
}

int mml_model_from_json(const char* json, mml_model** out) {
  if (!json || !out) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(json);
    auto [fit, spec] = mml::fit_from_json(j);
    std::uint64_t seed = j.value("seed", std::uint64_t{0});
    *out = new mml_model{std::move(fit), std::move(spec), seed};
  });
}

void mml_model_free(mml_model* model) { delete model; }

int mml_cluster(const mml_dataset* data, const mml_model* model,
                int** assignment_out, double** posterior_out, int* n_out,
                int* L_out) {
  if (!data || !model) return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    mml::ClusterResult res =
        mml::cluster(data->data, model->fit.theta, model->spec,
                     {1, data->data.T});
    if (assignment_out) {
      int* a = static_cast<int*>(std::malloc(sizeof(int) * res.assignment.size()));
      std::copy(res.assignment.begin(), res.assignment.end(), a);
      *assignment_out = a;
    }
    if (posterior_out) {
      double* p = static_cast<double*>(
          std::malloc(sizeof(double) * res.posterior.eta.size()));
      std::copy(res.posterior.eta.begin(), res.posterior.eta.end(), p);
      *posterior_out = p;
    }
    if (n_out) *n_out = res.posterior.n;
    if (L_out) *L_out = res.posterior.L;
  });
}

int mml_select(const mml_dataset* data, const char* options_json,
               char** trace_json_out) {
  if (!data || !options_json || !trace_json_out)
    return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(options_json);
    FitConfig cfg = parse_fit_options(j, data->data);
    if (!j.contains("T1"))
      throw mml::invalid_input("select requires T1 (training horizon)");
    mml::ModelSpec full = cfg.spec;
    full.active.resize(full.p);
    std::iota(full.active.begin(), full.active.end(), 1);
    mml::SelectionTrace trace =
        mml::forward_select(data->data, full, cfg.T1, cfg.em, cfg.refit);
    *trace_json_out =
        dup_string(mml::trace_to_json(trace, full, cfg.T1, cfg.em.seed).dump(2));
  });
}

int mml_reproduce_sim(const char* options_json, char** summary_json_out) {
  if (!options_json || !summary_json_out)
    return fail(MML_ERR_INVALID, "null argument");
  return guarded([&] {
    nlohmann::json j = nlohmann::json::parse(options_json);
    mml::StudyOptions opts;
    opts.replicates = j.value("replicates", opts.replicates);
    opts.T1 = j.value("T1", opts.T1);
    opts.seed = j.value("seed", opts.seed);
    opts.threads = j.value("threads", 0);
    opts.em.n_restarts = j.value("n_restarts", 3);
    opts.em.max_iter = j.value("max_iter", opts.em.max_iter);
    opts.em.rel_tol = j.value("rel_tol", opts.em.rel_tol);
    if (j.contains("generator")) {
      opts.generator = mml::generator_config_from_json(j.at("generator"));
      opts.use_table1 = false;
    }
    if (opts.replicates < 1)
      throw mml::invalid_input("replicates must be >= 1");
    mml::StudyResult res = mml::run_selection_study(opts);
    nlohmann::json out = {{"version", mml::kToolVersion},
                          {"replicates", res.replicates},
                          {"seed", opts.seed},
                          {"T1", opts.T1},
                          {"exact", res.exact},
                          {"one_extra", res.one_extra},
                          {"two_extra", res.two_extra},
                          {"more_extra", res.more_extra},
                          {"missed", res.missed},
                          {"selected", res.selected}};
    *summary_json_out = dup_string(out.dump(2));
  });
}

}  // extern "C"
