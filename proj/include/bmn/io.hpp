#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "bmn/estimation.hpp"
#include "bmn/experiments.hpp"
#include "bmn/mixture.hpp"
#include "bmn/network.hpp"

namespace bmn {

// Network files: {"nodes":[{"name","states","parents":[names],
// "cpt":[[Q probabilities] per parent configuration]}]}. Array order is the
// node ordering; configuration rows follow the mixed-radix convention with
// the first listed parent most significant. "cpt" may be omitted on every
// node to describe a bare structure.
nlohmann::json network_to_json(const DiscreteNetwork& net);
DiscreteNetwork network_from_json(const nlohmann::json& j);

// Mixture files extend the network format: each node carries
// "submodels":[{"parents":[names],"weight":psi,"cpt":[...]}] in the
// deterministic submodel order, and the node-level "cpt" holds the collapsed
// table (ignored on read and recomputable via collapse()).
nlohmann::json mixture_to_json(const MixtureNetwork& mix);
MixtureNetwork mixture_from_json(const nlohmann::json& j);
bool json_is_mixture(const nlohmann::json& j);

// Dataset files: CSV with a node-name header, 0-based state indices, and
// "?" for a missing entry.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text);

nlohmann::json fit_report_to_json(const FitReport& report);

std::string sweep_to_csv(const DiscreteNetwork& reference,
                         const std::vector<SweepRecord>& records);
nlohmann::json sweep_summary_json(const DiscreteNetwork& reference,
                                  const std::vector<SweepRecord>& records);
nlohmann::json mbn_report_to_json(const MbnEquivalenceReport& report);

// Non-finite scores have no JSON number; they become the strings
// "inf" / "-inf" / "nan".
nlohmann::json score_to_json(double score);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

DiscreteNetwork load_network(const std::string& path);
void save_network(const std::string& path, const DiscreteNetwork& net);
MixtureNetwork load_mixture(const std::string& path);
void save_mixture(const std::string& path, const MixtureNetwork& mix);
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);

}  // namespace bmn
