#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bmn/inference.hpp"
#include "bmn/mixture.hpp"
#include "bmn/network.hpp"

namespace bmn {

// Dirichlet-style pseudocounts. The family pseudocount applies per cell of
// each node's FULL candidate family table; submodel priors are obtained by
// marginalizing that table, never specified directly. Optional full tables
// override the scalars.
struct PriorSpec {
  double family_pseudocount = 0.5;
  double weight_pseudocount = 1.0;
  std::vector<CondTable> family_tables;            // per node; empty = use scalar
  std::vector<std::vector<double>> weight_tables;  // per node/submodel; empty = scalar

  void validate() const;
  CondTable family_prior_for(const DiscreteNetwork& base, int node) const;
  std::vector<double> weight_prior_for(const MixtureNetwork& mix, int node) const;
};

struct FitDiagnostics {
  int zero_denominator_columns = 0;   // uniform fallbacks in theta updates
  int responsibility_fallbacks = 0;   // all-zero responsibility vectors
  int score_decreases = 0;            // observed-data score drops > 1e-6
};

struct IterationRecord {
  int iteration = 0;  // 0 records the initial parameters
  double train_score = 0.0;
  std::vector<double> weight_entropy;  // per node, nats
  std::optional<double> test_score;    // filled by experiment harnesses
};

struct EmConfig {
  int max_iters = 200;
  double rel_tol = 1e-6;
  // Called after each recorded iteration (including iteration 0) with the
  // current mixture and its collapsed network.
  std::function<void(int iteration, const MixtureNetwork& mix,
                     const DiscreteNetwork& collapsed)>
      on_iteration;
};

struct FitReport {
  std::vector<IterationRecord> iterations;
  int iteration_count = 0;
  bool converged = false;
  MixtureNetwork mixture;
  DiscreteNetwork collapsed;
  FitDiagnostics diagnostics;
};

// N'(j, k') = sum over full configs k with proj(k) = k' of N(j, k).
CondTable marginalize_counts(const CondTable& full_counts, const SubsetProjection& proj);

// MAP CPT update: theta(j,k) = (prior + count) / column sum. A column whose
// denominator is zero becomes uniform and is counted in the diagnostics.
CondTable theta_update(const CondTable& counts, const CondTable& priors,
                       FitDiagnostics* diag = nullptr);

// Per-case, per-node posterior over submodels given family posteriors under
// the collapsed reference network: r_m proportional to
// psi_m * sum_{j,k} post(j,k) * theta_m(j, proj_m(k)).
std::vector<std::vector<std::vector<double>>> responsibilities(
    const MixtureNetwork& mix,
    const std::vector<std::vector<CondTable>>& family_posteriors,
    FitDiagnostics* diag = nullptr);

// MAP weight update: psi_m = (alpha_m + A_m) / sum_m (alpha_m + A_m).
std::vector<double> psi_update(std::span<const double> resp_sums,
                               std::span<const double> alpha);

// EM driver. `structure` supplies the candidate structure and submodel
// families (see make_mixture_skeleton / make_singleton_mixture); any
// parameters it carries are ignored. Initialization: uniform weights and
// CPTs estimated from tabulated counts (complete data) or expected counts
// under an all-uniform network (incomplete data). Each iteration recomputes
// expected family counts under the collapsed network, updates submodel CPTs
// from shared marginalized counts, then updates the weights from
// responsibilities. Stops when the relative change of the training score
// falls below rel_tol or after max_iters.
FitReport em_fit(const MixtureNetwork& structure, const Dataset& data,
                 const PriorSpec& priors = {}, const EmConfig& config = {});

// MAP objective without the normalization constraint terms:
// sum (prior + count) log theta + sum (alpha + resp_sum) log psi, where the
// counts and responsibility sums are taken under `anchor` and the logs at
// `eval`. Coefficients of zero contribute nothing; a positive coefficient on
// a zero parameter yields -inf.
double objective_value(const MixtureNetwork& eval, const MixtureNetwork& anchor,
                       const Dataset& data, const PriorSpec& priors = {});
double objective_value(const MixtureNetwork& mix, const Dataset& data,
                       const PriorSpec& priors = {});

}  // namespace bmn
