#include <cmath>
#include <set>

#include "doctest.h"

#include "bmn/network.hpp"
#include "bmn/rng.hpp"
#include "oracles.hpp"

using namespace bmn;

namespace {

DiscreteNetwork uniform_binary_node() {
  DiscreteNetwork net;
  net.nodes.push_back({"A", 2, {}, CondTable(2, 1, 0.5)});
  return net;
}

// A -> B with theta_A = (0.6, 0.4), theta_{B|A=0} = (0.8, 0.2),
// theta_{B|A=1} = (0.3, 0.7).
DiscreteNetwork two_node_chain() {
  DiscreteNetwork net;
  net.nodes.push_back({"A", 2, {}, CondTable(2, 1)});
  net.nodes[0].cpt.at(0, 0) = 0.6;
  net.nodes[0].cpt.at(1, 0) = 0.4;
  net.nodes.push_back({"B", 2, {0}, CondTable(2, 2)});
  net.nodes[1].cpt.at(0, 0) = 0.8;
  net.nodes[1].cpt.at(1, 0) = 0.2;
  net.nodes[1].cpt.at(0, 1) = 0.3;
  net.nodes[1].cpt.at(1, 1) = 0.7;
  return net;
}

}  // namespace

TEST_SUITE_BEGIN("network");

TEST_CASE("codec round-trips every configuration") {
  for (const auto& cards :
       {std::vector<int>{2}, {3, 2}, {2, 3, 2}, {4, 2, 3, 2}}) {
    const ParentConfigCodec codec(cards);
    int expected = 1;
    for (int c : cards) expected *= c;
    CHECK(codec.config_count() == expected);
    std::set<int> seen;
    for (const auto& tuple : oracle::all_joint_states(cards)) {
      const int k = codec.encode(tuple);
      CHECK(codec.decode(k) == tuple);
      seen.insert(k);
    }
    CHECK(static_cast<int>(seen.size()) == codec.config_count());
  }
  CHECK(ParentConfigCodec(std::vector<int>{}).config_count() == 1);
}

TEST_CASE("codec puts the first parent in the most significant digit") {
  const ParentConfigCodec codec({3, 2});
  CHECK(codec.encode(std::vector<int>{0, 0}) == 0);
  CHECK(codec.encode(std::vector<int>{0, 1}) == 1);
  CHECK(codec.encode(std::vector<int>{1, 0}) == 2);
  CHECK(codec.encode(std::vector<int>{2, 1}) == 5);
}

TEST_CASE("joint log-likelihood on hand-built networks") {
  CHECK(joint_log_likelihood(uniform_binary_node(), {0}) ==
        doctest::Approx(std::log(0.5)));

  DiscreteNetwork indep;
  indep.nodes.push_back({"A", 2, {}, CondTable(2, 1, 0.5)});
  indep.nodes.push_back({"B", 3, {}, CondTable(3, 1, 1.0 / 3.0)});
  CHECK(joint_log_likelihood(indep, {1, 2}) == doctest::Approx(std::log(1.0 / 6.0)));

  const DiscreteNetwork chain = two_node_chain();
  CHECK(joint_log_likelihood(chain, {0, 1}) == doctest::Approx(std::log(0.6 * 0.2)));
}

TEST_CASE("joint log-likelihood error paths and zero factors") {
  const DiscreteNetwork chain = two_node_chain();
  CHECK_THROWS_AS(joint_log_likelihood(chain, {0}), std::invalid_argument);
  CHECK_THROWS_AS(joint_log_likelihood(chain, {0, kMissing}), std::invalid_argument);
  CHECK_THROWS_AS(joint_log_likelihood(chain, {0, 2}), std::invalid_argument);

  DiscreteNetwork point;
  point.nodes.push_back({"A", 2, {}, CondTable(2, 1)});
  point.nodes[0].cpt.at(0, 0) = 1.0;
  CHECK(joint_log_likelihood(point, {1}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("exp(joint log-likelihood) sums to one over all joint states") {
  Rng rng(20240817);
  for (int trial = 0; trial < 6; ++trial) {
    const DiscreteNetwork net = oracle::random_network(rng, 2 + trial % 4);
    double total = 0.0;
    for (const auto& state : oracle::all_joint_states(oracle::node_cards(net)))
      total += std::exp(joint_log_likelihood(net, state));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dataset score is the per-case mean") {
  const DiscreteNetwork chain = two_node_chain();

  Dataset repeated;
  repeated.names = {"A", "B"};
  repeated.cases.assign(7, {0, 1});
  CHECK(dataset_score(chain, repeated) ==
        doctest::Approx(joint_log_likelihood(chain, {0, 1})));

  Dataset uniform;
  uniform.names = {"A"};
  uniform.cases = {{0}, {1}, {0}};
  CHECK(dataset_score(uniform_binary_node(), uniform) == doctest::Approx(std::log(0.5)));

  // Hand-enumerated factors for the four distinct cases of the chain.
  Dataset four;
  four.names = {"A", "B"};
  four.cases = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const double expected = (std::log(0.6 * 0.8) + std::log(0.6 * 0.2) +
                           std::log(0.4 * 0.3) + std::log(0.4 * 0.7)) /
                          4.0;
  CHECK(dataset_score(chain, four) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dataset score rejects empty and incomplete data") {
  const DiscreteNetwork chain = two_node_chain();
  Dataset empty;
  empty.names = {"A", "B"};
  CHECK_THROWS_AS(dataset_score(chain, empty), std::invalid_argument);

  Dataset missing;
  missing.names = {"A", "B"};
  missing.cases = {{0, kMissing}};
  CHECK_THROWS_AS(dataset_score(chain, missing), std::invalid_argument);
}

TEST_CASE("dataset score is -inf when a case has zero probability") {
  DiscreteNetwork point;
  point.nodes.push_back({"A", 2, {}, CondTable(2, 1)});
  point.nodes[0].cpt.at(0, 0) = 1.0;
  Dataset data;
  data.names = {"A"};
  data.cases = {{0}, {1}};
  CHECK(dataset_score(point, data) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("sampling honors point-mass CPTs and the seed contract") {
  DiscreteNetwork degenerate;
  degenerate.nodes.push_back({"A", 2, {}, CondTable(2, 1)});
  degenerate.nodes[0].cpt.at(0, 0) = 1.0;
  degenerate.nodes.push_back({"B", 3, {0}, CondTable(3, 2)});
  degenerate.nodes[1].cpt.at(0, 0) = 1.0;
  degenerate.nodes[1].cpt.at(0, 1) = 1.0;
  const Dataset zeros = sample(degenerate, 50, 7);
  for (const auto& row : zeros.cases) {
    CHECK(row[0] == 0);
    CHECK(row[1] == 0);
  }

  const DiscreteNetwork chain = two_node_chain();
  const Dataset a = sample(chain, 100, 99);
  const Dataset b = sample(chain, 100, 99);
  const Dataset c = sample(chain, 100, 100);
  CHECK(a.cases == b.cases);
  CHECK(a.cases != c.cases);
  CHECK_THROWS_AS(sample(chain, 0, 1), std::invalid_argument);
}

TEST_CASE("sampled frequencies approach the generator") {
  const Dataset big = sample(uniform_binary_node(), 100000, 1234);
  int zeros = 0;
  for (const auto& row : big.cases) zeros += row[0] == 0;
  CHECK(std::abs(zeros / 100000.0 - 0.5) <= 0.01);
}

TEST_CASE("score of a large self-sample approaches negative entropy") {
  Rng rng(5150);
  const DiscreteNetwork net = oracle::random_network(rng, 4);
  const double h = oracle::entropy(net);
  const Dataset data = sample(net, 100000, 777);
  CHECK(std::abs(dataset_score(net, data) - (-h)) <= 0.02);
}

TEST_CASE("random CPTs live strictly inside the simplex") {
  Rng rng(31);
  const DiscreteNetwork skel = oracle::random_network(rng, 5).skeleton();
  const DiscreteNetwork net = random_cpts(skel, 11);
  for (int i = 0; i < net.node_count(); ++i) {
    for (int k = 0; k < net.nodes[i].cpt.configs; ++k) {
      CHECK(std::abs(net.nodes[i].cpt.column_sum(k) - 1.0) <= 1e-12);
      for (double v : net.nodes[i].cpt.column(k)) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
    }
  }
  const DiscreteNetwork again = random_cpts(skel, 11);
  for (int i = 0; i < net.node_count(); ++i)
    CHECK(net.nodes[i].cpt.values == again.nodes[i].cpt.values);
}

TEST_CASE("structure validation rejects malformed networks") {
  DiscreteNetwork bad_parent;
  bad_parent.nodes.push_back({"A", 2, {0}, {}});
  CHECK_THROWS_AS(bad_parent.validate_structure(), std::invalid_argument);

  DiscreteNetwork one_state;
  one_state.nodes.push_back({"A", 1, {}, {}});
  CHECK_THROWS_AS(one_state.validate_structure(), std::invalid_argument);

  DiscreteNetwork dup;
  dup.nodes.push_back({"A", 2, {}, {}});
  dup.nodes.push_back({"A", 2, {}, {}});
  CHECK_THROWS_AS(dup.validate_structure(), std::invalid_argument);

  DiscreteNetwork unnormalized = uniform_binary_node();
  unnormalized.nodes[0].cpt.at(0, 0) = 0.6;
  CHECK_THROWS_AS(unnormalized.validate(), std::invalid_argument);

  DiscreteNetwork negative = uniform_binary_node();
  negative.nodes[0].cpt.at(0, 0) = -0.5;
  negative.nodes[0].cpt.at(1, 0) = 1.5;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}

TEST_CASE("align_dataset permutes columns by name") {
  const DiscreteNetwork chain = two_node_chain();
  Dataset swapped;
  swapped.names = {"B", "A"};
  swapped.cases = {{1, 0}, {0, 1}};
  const Dataset aligned = align_dataset(swapped, chain);
  CHECK(aligned.names == std::vector<std::string>{"A", "B"});
  CHECK(aligned.cases[0] == std::vector<int>{0, 1});
  CHECK(aligned.cases[1] == std::vector<int>{1, 0});

  Dataset wrong;
  wrong.names = {"A", "C"};
  wrong.cases = {{0, 0}};
  CHECK_THROWS_AS(align_dataset(wrong, chain), std::invalid_argument);
}

TEST_SUITE_END();
