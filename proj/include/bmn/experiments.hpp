#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bmn/estimation.hpp"
#include "bmn/network.hpp"

namespace bmn {

// One fitted model in a structure sweep. `ordering` maps position to a node
// index of the reference network; bit b(b-1)/2 + a of `structure_mask` is the
// arc from position a to position b (a < b).
struct SweepRecord {
  std::vector<int> ordering;
  std::uint64_t structure_mask = 0;
  double train_score = 0.0;
  double test_score = 0.0;
  bool tag_empty = false;
  bool tag_true = false;
  bool tag_full = false;
};

// Visits every (ordering, arc subset) pair: orderings in lexicographic order,
// masks ascending within each ordering. Guarded at V <= 6.
void enumerate_models(
    int v, const std::function<void(const std::vector<int>& ordering,
                                    std::uint64_t mask)>& visit);

// Candidate-model skeleton over the reference network's nodes, permuted by
// `ordering`, with parents drawn from `mask`.
DiscreteNetwork model_skeleton(const DiscreteNetwork& reference,
                               const std::vector<int>& ordering, std::uint64_t mask);

// Arc mask of a network under its own (identity) ordering.
std::uint64_t structure_mask_of(const DiscreteNetwork& net);

// Samples one train/test split from the true network, then fits every
// enumerated model by conventional MAP and scores both sets. Records appear
// in enumeration order.
std::vector<SweepRecord> run_sweep(const DiscreteNetwork& true_net, int n_train,
                                   int n_test, std::uint64_t seed,
                                   const PriorSpec& priors = {});

// Fits a parent-capped mixture on the full structure under `ordering` and
// records the test score of the collapsed network at every iteration.
FitReport run_bmn_experiment(const DiscreteNetwork& true_net,
                             const std::vector<int>& ordering,
                             const std::vector<int>& caps, int n_train, int n_test,
                             std::uint64_t seed, const PriorSpec& priors = {},
                             EmConfig config = {});

struct MbnEquivalenceReport {
  int node_count = 0;
  long long structure_count = 0;
  int local_component_count = 0;
  int case_count = 0;
  double max_abs_deviation = 0.0;
};

// Builds a random full mixture over `v` nodes, materializes the equivalent
// mixture of global structures, and compares the two likelihood routes on
// sampled complete cases. Guarded at v <= 4.
MbnEquivalenceReport verify_mbn_equivalence(int v, const std::vector<int>& cards,
                                            std::uint64_t seed, int n_cases = 1000);

// Built-in 4-node benchmark network: states (3, 2, 2, 3) and arcs
// One->Three, Two->Three, Three->Four; CPTs drawn per seed.
DiscreteNetwork default_true_skeleton();
DiscreteNetwork default_true_model(std::uint64_t seed);

}  // namespace bmn
