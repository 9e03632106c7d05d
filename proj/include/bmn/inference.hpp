#pragma once

#include <vector>

#include "bmn/network.hpp"
#include "bmn/table.hpp"

namespace bmn {

// Expected family counts, one table per node, shaped like that node's CPT.
using FamilyCountTable = std::vector<CondTable>;

// Posterior over the family (node state j, parent configuration k) given a
// possibly-missing case, computed by exact variable elimination. A case
// whose family members are all observed yields a point mass.
CondTable family_posterior(const DiscreteNetwork& net, const std::vector<int>& row,
                           int node);

// Sum of per-case family posteriors: N[node](j, k). Equals the raw
// contingency counts when the data are complete.
FamilyCountTable expected_family_counts(const DiscreteNetwork& net, const Dataset& data);

// log P(observed entries), marginalizing any missing ones; equals
// joint_log_likelihood on a complete case.
double observed_case_log_likelihood(const DiscreteNetwork& net,
                                    const std::vector<int>& row);

// Mean observed-data log-likelihood per case; the missing-data counterpart
// of dataset_score.
double observed_data_score(const DiscreteNetwork& net, const Dataset& data);

}  // namespace bmn
