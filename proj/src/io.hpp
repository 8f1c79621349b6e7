#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "em.hpp"
#include "model.hpp"
#include "simgen.hpp"
#include "varsel.hpp"

#include <json.hpp>

namespace mml {

inline constexpr const char* kToolVersion = "0.1.0";

struct CsvOptions {
  bool add_intercept = true;  // prepend a constant-1 column when absent
};

// Long-format CSV with header id,t,y,x1,...,xp. Every id must cover the
// identical contiguous range t = 1..T. Individuals are ordered by first
// appearance.
PanelDataset read_panel_csv(const std::string& path,
                            const CsvOptions& options = {});
void write_panel_csv(const PanelDataset& data, const std::string& path);

void write_labels_csv(const PanelDataset& data,
                      const std::vector<int>& labels,
                      const std::string& path);
void write_assignments_csv(const PanelDataset& data,
                           const ClusterResult& result,
                           const std::string& path);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ParameterSet& theta);
ParameterSet params_from_json(const nlohmann::json& j);

nlohmann::json fit_to_json(const FitResult& fit, const ModelSpec& spec,
                           std::uint64_t seed);
std::pair<FitResult, ModelSpec> fit_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const SelectionTrace& trace,
                             const ModelSpec& spec, int T1,
                             std::uint64_t seed);

nlohmann::json generator_config_to_json(const GeneratorConfig& config);
// Accepts {"preset": "table1"} with optional overrides, or a fully explicit
// configuration.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace mml
