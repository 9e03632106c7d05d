#include <cmath>
#include <numeric>

#include "doctest.h"

#include "bmn/errors.hpp"
#include "bmn/mixture.hpp"
#include "bmn/rng.hpp"
#include "oracles.hpp"

using namespace bmn;

namespace {

long long binomial(int n, int k) {
  long long out = 1;
  for (int t = 1; t <= k; ++t) out = out * (n - t + 1) / t;
  return out;
}

// Full candidate structure over v nodes with all caps at maximum.
MixtureNetwork full_mixture_skeleton(int v, const std::vector<int>& cards) {
  DiscreteNetwork skel;
  for (int i = 0; i < v; ++i) {
    NodeSpec node;
    node.name = "X" + std::to_string(i + 1);
    node.states = cards[i];
    node.parents.resize(i);
    std::iota(node.parents.begin(), node.parents.end(), 0);
    skel.nodes.push_back(std::move(node));
  }
  std::vector<int> caps(v);
  std::iota(caps.begin(), caps.end(), 0);
  return make_mixture_skeleton(skel, caps);
}

}  // namespace

TEST_SUITE_BEGIN("mixture");

TEST_CASE("substructure enumeration is size-then-lexicographic") {
  const std::vector<int> candidates = {2, 5, 7};
  const auto all = enumerate_substructures(candidates, 3);
  REQUIRE(all.size() == 8);  // 2^3 when uncapped
  CHECK(all[0].empty());
  CHECK(all[1] == std::vector<int>{2});
  CHECK(all[2] == std::vector<int>{5});
  CHECK(all[3] == std::vector<int>{7});
  CHECK(all[4] == std::vector<int>{2, 5});
  CHECK(all[5] == std::vector<int>{2, 7});
  CHECK(all[6] == std::vector<int>{5, 7});
  CHECK(all[7] == std::vector<int>{2, 5, 7});

  CHECK(enumerate_substructures(candidates, 2).size() == 7);  // 1 + 3 + 3
  CHECK(enumerate_substructures({}, 0).size() == 1);
  CHECK_THROWS_AS(enumerate_substructures(candidates, 4), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_substructures(candidates, -1), std::invalid_argument);
}

TEST_CASE("substructure counts match the binomial closed form") {
  std::vector<int> candidates;
  for (int p = 0; p <= 12; ++p) {
    if (p > 0) candidates.push_back(p);
    for (int cap = 0; cap <= p; ++cap) {
      long long expected = 0;
      for (int s = 0; s <= cap; ++s) expected += binomial(p, s);
      CHECK(static_cast<long long>(enumerate_substructures(candidates, cap).size()) ==
            expected);
    }
  }
}

TEST_CASE("subset projection has uniform fibers") {
  Rng rng(17);
  const std::vector<int> cards = {2, 3, 2, 4};
  for (const auto& keep :
       {std::vector<int>{}, {0}, {1, 3}, {0, 2}, {0, 1, 2, 3}}) {
    const SubsetProjection proj(cards, keep);
    int excluded = 1;
    for (int pos = 0; pos < 4; ++pos)
      if (std::find(keep.begin(), keep.end(), pos) == keep.end())
        excluded *= cards[pos];
    std::vector<int> fiber(proj.subset_config_count(), 0);
    for (int k = 0; k < proj.full_config_count(); ++k) ++fiber[proj(k)];
    for (int size : fiber) CHECK(size == excluded);
  }
  CHECK_THROWS_AS(SubsetProjection(cards, std::vector<int>{1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SubsetProjection(cards, std::vector<int>{4}), std::invalid_argument);
}

TEST_CASE("a singleton full-subset mixture scores like the conventional network") {
  Rng rng(23);
  const DiscreteNetwork net = oracle::random_network(rng, 4);
  MixtureNetwork mix = make_singleton_mixture(net);
  for (int i = 0; i < net.node_count(); ++i) mix.nodes[i][0].cpt = net.nodes[i].cpt;
  for (const auto& state : oracle::all_joint_states(oracle::node_cards(net)))
    CHECK(bmn_log_likelihood(mix, state) == joint_log_likelihood(net, state));
}

TEST_CASE("two-submodel factor is the weighted combination") {
  DiscreteNetwork base;
  base.nodes.push_back({"A", 2, {}, {}});
  base.nodes.push_back({"B", 2, {0}, {}});
  MixtureNetwork mix;
  mix.base = base;
  mix.nodes.resize(2);
  mix.nodes[0].push_back({{}, CondTable(2, 1, 0.5), 1.0});
  // Full submodel puts 0.8 on the case; empty submodel puts 0.5.
  Submodel full{{0}, CondTable(2, 2), 0.5};
  full.cpt.at(0, 0) = 0.8;
  full.cpt.at(1, 0) = 0.2;
  full.cpt.at(0, 1) = 0.4;
  full.cpt.at(1, 1) = 0.6;
  Submodel empty{{}, CondTable(2, 1, 0.5), 0.5};
  mix.nodes[1].push_back(std::move(full));
  mix.nodes[1].push_back(std::move(empty));

  const double got = bmn_log_likelihood(mix, {0, 0});
  CHECK(got == doctest::Approx(std::log(0.5) + std::log(0.65)).epsilon(1e-12));
}

TEST_CASE("mixture likelihood matches the brute-force walker") {
  Rng rng(5005);
  for (int trial = 0; trial < 10; ++trial) {
    const MixtureNetwork mix = oracle::random_mixture(rng, 2 + trial % 3);
    const Dataset data = sample(collapse(mix), 20, rng());
    for (const auto& row : data.cases)
      CHECK(bmn_log_likelihood(mix, row) ==
            doctest::Approx(oracle::bmn_log_likelihood(mix, row)).epsilon(1e-12));
  }
}

TEST_CASE("collapse of a singleton mixture is the identity") {
  Rng rng(606);
  const DiscreteNetwork net = oracle::random_network(rng, 4);
  MixtureNetwork mix = make_singleton_mixture(net);
  for (int i = 0; i < net.node_count(); ++i) mix.nodes[i][0].cpt = net.nodes[i].cpt;
  const DiscreteNetwork back = collapse(mix);
  for (int i = 0; i < net.node_count(); ++i)
    CHECK(back.nodes[i].cpt.values == net.nodes[i].cpt.values);
}

TEST_CASE("degenerate and convex collapse weights") {
  DiscreteNetwork base;
  base.nodes.push_back({"A", 2, {}, {}});
  base.nodes.push_back({"B", 2, {0}, {}});
  MixtureNetwork mix;
  mix.base = base;
  mix.nodes.resize(2);
  mix.nodes[0].push_back({{}, CondTable(2, 1, 0.5), 1.0});
  Submodel full{{0}, CondTable(2, 2), 1.0};
  full.cpt.at(0, 0) = 0.8;
  full.cpt.at(1, 0) = 0.2;
  full.cpt.at(0, 1) = 0.4;
  full.cpt.at(1, 1) = 0.6;
  Submodel empty{{}, CondTable(2, 1, 0.5), 0.0};
  mix.nodes[1].push_back(full);
  mix.nodes[1].push_back(empty);

  // All weight on the full submodel reproduces its CPT exactly.
  DiscreteNetwork collapsed = collapse(mix);
  CHECK(collapsed.nodes[1].cpt.values == full.cpt.values);

  // A 50/50 split mixes the columns entrywise.
  mix.nodes[1][0].weight = 0.5;
  mix.nodes[1][1].weight = 0.5;
  collapsed = collapse(mix);
  CHECK(collapsed.nodes[1].cpt.at(0, 0) == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(collapsed.nodes[1].cpt.at(1, 0) == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(collapsed.nodes[1].cpt.at(0, 1) == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("collapse preserves normalization and the likelihood") {
  Rng rng(7117);
  for (int trial = 0; trial < 10; ++trial) {
    const MixtureNetwork mix = oracle::random_mixture(rng, 2 + trial % 3);
    const DiscreteNetwork collapsed = collapse(mix);
    for (int i = 0; i < collapsed.node_count(); ++i)
      for (int k = 0; k < collapsed.nodes[i].cpt.configs; ++k)
        CHECK(std::abs(collapsed.nodes[i].cpt.column_sum(k) - 1.0) <= 1e-10);
    for (const auto& state :
         oracle::all_joint_states(oracle::node_cards(collapsed)))
      CHECK(std::abs(bmn_log_likelihood(mix, state) -
                     joint_log_likelihood(collapsed, state)) <= 1e-10);
  }
}

TEST_CASE("restricted global mixture has the published component counts") {
  Rng rng(99);
  const MixtureNetwork mix = random_mixture_params(
      full_mixture_skeleton(4, {2, 3, 2, 2}), rng());
  const auto mbn = build_restricted_mbn(mix);
  CHECK(mbn.size() == 64);  // 2^(V(V-1)/2) for V = 4
  int local = 0;
  for (int i = 0; i < 4; ++i) local += mix.submodel_count(i);
  CHECK(local == 15);  // 2^V - 1
  double weight_sum = 0.0;
  for (const auto& wn : mbn) weight_sum += wn.weight;
  CHECK(std::abs(weight_sum - 1.0) <= 1e-10);
}

TEST_CASE("an all-singleton mixture yields one global structure") {
  Rng rng(3);
  const DiscreteNetwork net = oracle::random_network(rng, 3);
  MixtureNetwork mix = make_singleton_mixture(net);
  for (int i = 0; i < net.node_count(); ++i) mix.nodes[i][0].cpt = net.nodes[i].cpt;
  const auto mbn = build_restricted_mbn(mix);
  REQUIRE(mbn.size() == 1);
  CHECK(mbn[0].weight == 1.0);
  for (const auto& state : oracle::all_joint_states(oracle::node_cards(net)))
    CHECK(mbn_log_likelihood(mbn, state) ==
          doctest::Approx(joint_log_likelihood(net, state)).epsilon(1e-12));
}

TEST_CASE("the cross-product guard trips on large mixtures") {
  std::vector<int> cards(7, 2);
  const MixtureNetwork mix = full_mixture_skeleton(7, cards);
  CHECK_THROWS_AS(build_restricted_mbn(random_mixture_params(mix, 1)), GuardError);
}

TEST_CASE("product-of-sums equals sum-of-products") {
  Rng rng(20250101);
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<int> card(2, 3);
    const int v = 2 + trial % 3;
    std::vector<int> cards;
    for (int i = 0; i < v; ++i) cards.push_back(card(rng));
    const MixtureNetwork mix =
        random_mixture_params(full_mixture_skeleton(v, cards), rng());
    const auto mbn = build_restricted_mbn(mix);
    const Dataset cases = sample(collapse(mix), 100, rng());
    for (const auto& row : cases.cases)
      CHECK(std::abs(bmn_log_likelihood(mix, row) - mbn_log_likelihood(mbn, row)) <=
            1e-10);
  }
}

TEST_CASE("duplicate structures in a global mixture collapse to either one") {
  Rng rng(44);
  const DiscreteNetwork net = oracle::random_network(rng, 3);
  std::vector<WeightedNetwork> mbn;
  mbn.push_back({0.3, net});
  mbn.push_back({0.7, net});
  for (const auto& state : oracle::all_joint_states(oracle::node_cards(net)))
    CHECK(mbn_log_likelihood(mbn, state) ==
          doctest::Approx(joint_log_likelihood(net, state)).epsilon(1e-12));
}

TEST_CASE("mixture validation catches bad weights and subsets") {
  DiscreteNetwork base;
  base.nodes.push_back({"A", 2, {}, {}});
  base.nodes.push_back({"B", 2, {0}, {}});

  MixtureNetwork mix;
  mix.base = base;
  mix.nodes.resize(2);
  mix.nodes[0].push_back({{}, CondTable(2, 1, 0.5), 1.0});
  mix.nodes[1].push_back({{0}, CondTable(2, 2, 0.5), 0.6});
  mix.nodes[1].push_back({{}, CondTable(2, 1, 0.5), 0.6});
  CHECK_THROWS_AS(mix.validate(), std::invalid_argument);  // weights sum to 1.2

  mix.nodes[1][1].weight = 0.4;
  CHECK_NOTHROW(mix.validate());

  mix.nodes[1][1].parents = {0};  // duplicate subset
  CHECK_THROWS_AS(mix.validate_structure(), std::invalid_argument);

  mix.nodes[1][1].parents = {1};  // outside the candidate set
  CHECK_THROWS_AS(mix.validate_structure(), std::invalid_argument);
}

TEST_SUITE_END();
