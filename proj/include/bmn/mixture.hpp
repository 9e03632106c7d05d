#pragma once

#include <cstdint>
#include <vector>

#include "bmn/network.hpp"
#include "bmn/table.hpp"

namespace bmn {

// One mixture component of a node's CPD: a subset of the candidate parents
// with its own CPT over the subset's configurations.
struct Submodel {
  std::vector<int> parents;  // subset of the node's candidate parents
  CondTable cpt;             // states x subset configs; empty in skeletons
  double weight = 0.0;
};

// Per-node mixtures of parent-subset submodels over a shared candidate
// structure. `base` carries the ordering, cardinalities and candidate parent
// sets; its own CPTs are unused.
struct MixtureNetwork {
  DiscreteNetwork base;
  std::vector<std::vector<Submodel>> nodes;

  int node_count() const { return base.node_count(); }
  int submodel_count(int node) const { return static_cast<int>(nodes[node].size()); }
  // Positions of a submodel's parents within the node's candidate parent list.
  std::vector<int> submodel_positions(int node, int sub) const;

  void validate_structure() const;
  void validate() const;  // structure plus weights and CPT normalization
};

// Maps a configuration index over the full candidate parent set to the
// configuration index over a kept subset, summing convention: every excluded
// parent contributes a fiber of size equal to its cardinality.
class SubsetProjection {
 public:
  SubsetProjection(const std::vector<int>& candidate_cards,
                   const std::vector<int>& keep_positions);

  int operator()(int full_config) const { return map_[full_config]; }
  int full_config_count() const { return static_cast<int>(map_.size()); }
  int subset_config_count() const { return subset_count_; }
  const std::vector<int>& map() const { return map_; }

 private:
  std::vector<int> map_;
  int subset_count_ = 1;
};

// All subsets of `candidates` of size <= cap, ordered by size and then
// lexicographically by member position. Count is sum_{s=0}^{cap} C(P, s).
std::vector<std::vector<int>> enumerate_substructures(const std::vector<int>& candidates,
                                                      int cap);

// Structure-only mixture with the full size-capped subset family per node
// (caps are clamped to each node's candidate count) and uniform weights.
MixtureNetwork make_mixture_skeleton(const DiscreteNetwork& base,
                                     const std::vector<int>& caps);

// Degenerate mixture with a single full-subset submodel per node; this is
// the conventional model expressed in mixture form.
MixtureNetwork make_singleton_mixture(const DiscreteNetwork& base);

// Fills submodel CPTs and mixture weights with uniform-simplex draws.
MixtureNetwork random_mixture_params(const MixtureNetwork& structure, std::uint64_t seed);

// log P(case) = sum_i log sum_m psi_{i,m} theta_{i,m}(x_i | projected parents).
double bmn_log_likelihood(const MixtureNetwork& mix, const std::vector<int>& complete_case);

// Conventional network over the full candidate parent sets with
// theta(j,k) = sum_m psi_m theta_m(j, proj_m(k)).
DiscreteNetwork collapse(const MixtureNetwork& mix);

struct WeightedNetwork {
  double weight = 0.0;
  DiscreteNetwork net;
};

// Materializes the equivalent mixture over global structures: one network
// per element of the cross-product of per-node submodels, weighted by the
// product of the submodel weights. Guarded at 100000 structures.
std::vector<WeightedNetwork> build_restricted_mbn(const MixtureNetwork& mix);

// log sum_m weight_m * P_m(case); the sum-of-products counterpart of
// bmn_log_likelihood, kept as an independent evaluation route.
double mbn_log_likelihood(const std::vector<WeightedNetwork>& mbn,
                          const std::vector<int>& complete_case);

}  // namespace bmn
