#include "bmn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bmn/errors.hpp"
#include "bmn/mixture.hpp"
#include "bmn/rng.hpp"

namespace bmn {
namespace {

// Sub-seed streams hung off one master seed.
constexpr std::uint64_t kStreamModel = 0;
constexpr std::uint64_t kStreamTrain = 1;
constexpr std::uint64_t kStreamTest = 2;

void check_ordering(const DiscreteNetwork& net, const std::vector<int>& ordering) {
  if (static_cast<int>(ordering.size()) != net.node_count())
    throw std::invalid_argument("ordering has the wrong length");
  std::vector<bool> seen(ordering.size(), false);
  for (int idx : ordering) {
    if (idx < 0 || idx >= net.node_count() || seen[static_cast<std::size_t>(idx)])
      throw std::invalid_argument("ordering is not a permutation of the node indices");
    seen[static_cast<std::size_t>(idx)] = true;
  }
}

}  // namespace

void enumerate_models(
    int v, const std::function<void(const std::vector<int>&, std::uint64_t)>& visit) {
  if (v < 1 || v > 6)
    throw GuardError("enumerate_models: node count must be between 1 and 6");
  std::vector<int> ordering(static_cast<std::size_t>(v));
  std::iota(ordering.begin(), ordering.end(), 0);
  const int arcs = v * (v - 1) / 2;
  const std::uint64_t masks = std::uint64_t{1} << arcs;
  do {
    for (std::uint64_t mask = 0; mask < masks; ++mask) visit(ordering, mask);
  } while (std::next_permutation(ordering.begin(), ordering.end()));
}

DiscreteNetwork model_skeleton(const DiscreteNetwork& reference,
                               const std::vector<int>& ordering, std::uint64_t mask) {
  check_ordering(reference, ordering);
  const int v = reference.node_count();
  const int arcs = v * (v - 1) / 2;
  if (arcs < 64 && mask >= (std::uint64_t{1} << arcs))
    throw std::invalid_argument("model_skeleton: mask has bits beyond the arc set");
  DiscreteNetwork out;
  out.nodes.reserve(static_cast<std::size_t>(v));
  for (int b = 0; b < v; ++b) {
    NodeSpec node;
    node.name = reference.nodes[ordering[b]].name;
    node.states = reference.nodes[ordering[b]].states;
    for (int a = 0; a < b; ++a)
      if ((mask >> (b * (b - 1) / 2 + a)) & 1) node.parents.push_back(a);
    out.nodes.push_back(std::move(node));
  }
  return out;
}

std::uint64_t structure_mask_of(const DiscreteNetwork& net) {
  net.validate_structure();
  std::uint64_t mask = 0;
  for (int b = 0; b < net.node_count(); ++b)
    for (int a : net.nodes[b].parents)
      mask |= std::uint64_t{1} << (b * (b - 1) / 2 + a);
  return mask;
}

std::vector<SweepRecord> run_sweep(const DiscreteNetwork& true_net, int n_train,
                                   int n_test, std::uint64_t seed,
                                   const PriorSpec& priors) {
  true_net.validate();
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("run_sweep: need at least one train and test case");
  const int v = true_net.node_count();
  const Dataset train = sample(true_net, n_train, derive_seed(seed, kStreamTrain));
  const Dataset test = sample(true_net, n_test, derive_seed(seed, kStreamTest));

  const std::uint64_t true_mask = structure_mask_of(true_net);
  const std::uint64_t full_mask =
      (std::uint64_t{1} << (v * (v - 1) / 2)) - 1;
  std::vector<int> identity(static_cast<std::size_t>(v));
  std::iota(identity.begin(), identity.end(), 0);

  std::vector<SweepRecord> records;
  // Datasets are re-aligned once per ordering, not per mask.
  std::vector<int> aligned_for;
  Dataset train_aligned, test_aligned;
  enumerate_models(v, [&](const std::vector<int>& ordering, std::uint64_t mask) {
    DiscreteNetwork skel = model_skeleton(true_net, ordering, mask);
    if (ordering != aligned_for) {
      train_aligned = align_dataset(train, skel);
      test_aligned = align_dataset(test, skel);
      aligned_for = ordering;
    }
    const FitReport fit =
        em_fit(make_singleton_mixture(skel), train_aligned, priors);
    SweepRecord rec;
    rec.ordering = ordering;
    rec.structure_mask = mask;
    rec.train_score = fit.iterations.back().train_score;
    rec.test_score = dataset_score(fit.collapsed, test_aligned);
    rec.tag_empty = mask == 0;
    rec.tag_full = mask == full_mask;
    rec.tag_true = ordering == identity && mask == true_mask;
    records.push_back(std::move(rec));
  });
  return records;
}

FitReport run_bmn_experiment(const DiscreteNetwork& true_net,
                             const std::vector<int>& ordering,
                             const std::vector<int>& caps, int n_train, int n_test,
                             std::uint64_t seed, const PriorSpec& priors,
                             EmConfig config) {
  true_net.validate();
  check_ordering(true_net, ordering);
  if (caps.size() != ordering.size())
    throw std::invalid_argument("run_bmn_experiment: need one cap per node");
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("run_bmn_experiment: need train and test cases");

  const int v = true_net.node_count();
  const std::uint64_t full_mask = (std::uint64_t{1} << (v * (v - 1) / 2)) - 1;
  const DiscreteNetwork skel = model_skeleton(true_net, ordering, full_mask);

  const Dataset train = align_dataset(
      sample(true_net, n_train, derive_seed(seed, kStreamTrain)), skel);
  const Dataset test = align_dataset(
      sample(true_net, n_test, derive_seed(seed, kStreamTest)), skel);

  std::vector<double> test_scores;
  const auto user_hook = config.on_iteration;
  config.on_iteration = [&](int iteration, const MixtureNetwork& mix,
                            const DiscreteNetwork& collapsed) {
    test_scores.push_back(dataset_score(collapsed, test));
    if (user_hook) user_hook(iteration, mix, collapsed);
  };

  FitReport report = em_fit(make_mixture_skeleton(skel, caps), train, priors, config);
  for (std::size_t t = 0; t < report.iterations.size(); ++t)
    report.iterations[t].test_score = test_scores[t];
  return report;
}

MbnEquivalenceReport verify_mbn_equivalence(int v, const std::vector<int>& cards,
                                            std::uint64_t seed, int n_cases) {
  if (v < 1 || v > 4)
    throw GuardError("verify_mbn_equivalence: node count must be between 1 and 4");
  if (static_cast<int>(cards.size()) != v)
    throw std::invalid_argument("verify_mbn_equivalence: need one cardinality per node");
  if (n_cases < 1)
    throw std::invalid_argument("verify_mbn_equivalence: need at least one case");

  DiscreteNetwork skel;
  for (int i = 0; i < v; ++i) {
    NodeSpec node;
    node.name = "X" + std::to_string(i + 1);
    node.states = cards[i];
    node.parents.resize(static_cast<std::size_t>(i));
    std::iota(node.parents.begin(), node.parents.end(), 0);
    skel.nodes.push_back(std::move(node));
  }
  std::vector<int> caps(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) caps[i] = i;

  const MixtureNetwork mix = random_mixture_params(
      make_mixture_skeleton(skel, caps), derive_seed(seed, kStreamModel));
  const auto mbn = build_restricted_mbn(mix);
  const Dataset cases = sample(collapse(mix), n_cases, derive_seed(seed, kStreamTest));

  MbnEquivalenceReport report;
  report.node_count = v;
  report.structure_count = static_cast<long long>(mbn.size());
  report.local_component_count = 0;
  for (int i = 0; i < v; ++i) report.local_component_count += mix.submodel_count(i);
  report.case_count = n_cases;
  for (const auto& row : cases.cases) {
    const double dev =
        std::abs(bmn_log_likelihood(mix, row) - mbn_log_likelihood(mbn, row));
    report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
  }
  return report;
}

DiscreteNetwork default_true_skeleton() {
  DiscreteNetwork net;
  net.nodes.resize(4);
  net.nodes[0].name = "One";
  net.nodes[0].states = 3;
  net.nodes[1].name = "Two";
  net.nodes[1].states = 2;
  net.nodes[2].name = "Three";
  net.nodes[2].states = 2;
  net.nodes[2].parents = {0, 1};
  net.nodes[3].name = "Four";
  net.nodes[3].states = 3;
  net.nodes[3].parents = {2};
  return net;
}

DiscreteNetwork default_true_model(std::uint64_t seed) {
  return random_cpts(default_true_skeleton(), derive_seed(seed, kStreamModel));
}

}  // namespace bmn
