#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bmn/table.hpp"

namespace bmn {

inline constexpr int kMissing = -1;
inline constexpr double kProbabilityTolerance = 1e-12;

struct NodeSpec {
  std::string name;
  int states = 0;            // >= 2
  std::vector<int> parents;  // indices of strictly earlier nodes, codec order
  CondTable cpt;             // states x prod(parent cards); empty in skeletons
};

// Discrete Bayesian network with a fixed node ordering: arcs only run from
// earlier to later positions in `nodes`. Treated as immutable once built,
// so sharing across concurrent readers is safe.
struct DiscreteNetwork {
  std::vector<NodeSpec> nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int index_of(std::string_view name) const;
  std::vector<int> parent_cards(int node) const;
  ParentConfigCodec parent_codec(int node) const;
  int config_count(int node) const;
  bool has_cpts() const;
  DiscreteNetwork skeleton() const;

  void validate_structure() const;  // throws std::invalid_argument
  void validate() const;            // structure plus CPT shape and normalization
};

// N rows of discrete observations aligned to a network's node names;
// kMissing marks an unobserved entry.
struct Dataset {
  std::vector<std::string> names;
  std::vector<std::vector<int>> cases;

  int case_count() const { return static_cast<int>(cases.size()); }
  bool complete() const;
};

bool case_complete(const std::vector<int>& row);

void validate_case(const DiscreteNetwork& net, const std::vector<int>& row,
                   bool allow_missing);
void validate_dataset(const DiscreteNetwork& net, const Dataset& data,
                      bool allow_missing = true);

// Reorders dataset columns to match the network's node order.
Dataset align_dataset(const Dataset& data, const DiscreteNetwork& net);

// Flat parent configuration of `node` under `row`; all parents must be observed.
int parent_config_of(const DiscreteNetwork& net, int node, const std::vector<int>& row);

// log P(case) in nats; -inf when any CPT factor is zero.
double joint_log_likelihood(const DiscreteNetwork& net, const std::vector<int>& complete_case);

// Mean per-case log-likelihood in nats. Requires complete data.
double dataset_score(const DiscreteNetwork& net, const Dataset& data);

// Ancestral sampling in node order; deterministic for a given seed.
Dataset sample(const DiscreteNetwork& net, int n, std::uint64_t seed);

// Fills every CPT column with a draw from the uniform distribution on the
// simplex. Any CPT values already present are ignored.
DiscreteNetwork random_cpts(const DiscreteNetwork& skeleton, std::uint64_t seed);

// All-uniform CPTs; the bootstrap reference model for incomplete data.
DiscreteNetwork uniform_cpts(const DiscreteNetwork& skeleton);

}  // namespace bmn
