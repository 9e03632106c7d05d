#pragma once

// Brute-force reference implementations used only by tests. These walk the
// CPT tables directly with their own index arithmetic so they stay
// independent of the library's inference and mixture code paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "bmn/mixture.hpp"
#include "bmn/network.hpp"
#include "bmn/rng.hpp"
#include "bmn/table.hpp"

namespace oracle {

inline std::vector<std::vector<int>> all_joint_states(const std::vector<int>& cards) {
  std::vector<std::vector<int>> out;
  std::vector<int> state(cards.size(), 0);
  while (true) {
    out.push_back(state);
    int d = static_cast<int>(cards.size()) - 1;
    while (d >= 0 && ++state[d] == cards[d]) state[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

inline std::vector<int> node_cards(const bmn::DiscreteNetwork& net) {
  std::vector<int> cards;
  for (const auto& n : net.nodes) cards.push_back(n.states);
  return cards;
}

// P(row) as a direct product of CPT lookups.
inline double joint_prob(const bmn::DiscreteNetwork& net, const std::vector<int>& row) {
  double p = 1.0;
  for (int i = 0; i < net.node_count(); ++i) {
    int k = 0;
    for (int par : net.nodes[i].parents) k = k * net.nodes[par].states + row[par];
    p *= net.nodes[i].cpt.values[static_cast<std::size_t>(k) * net.nodes[i].states + row[i]];
  }
  return p;
}

// Posterior over (node state, full parent config) by enumerating every
// completion of the missing entries.
inline bmn::CondTable family_posterior(const bmn::DiscreteNetwork& net,
                                       const std::vector<int>& row, int node) {
  const int q = net.nodes[node].states;
  int r = 1;
  for (int par : net.nodes[node].parents) r *= net.nodes[par].states;
  bmn::CondTable table(q, r);

  std::vector<int> missing;
  for (int i = 0; i < net.node_count(); ++i)
    if (row[i] == bmn::kMissing) missing.push_back(i);

  std::vector<int> cards;
  for (int i : missing) cards.push_back(net.nodes[i].states);

  double total = 0.0;
  std::vector<int> fill(missing.size(), 0);
  std::vector<int> complete = row;
  while (true) {
    for (std::size_t t = 0; t < missing.size(); ++t) complete[missing[t]] = fill[t];
    const double p = joint_prob(net, complete);
    int k = 0;
    for (int par : net.nodes[node].parents)
      k = k * net.nodes[par].states + complete[par];
    table.at(complete[node], k) += p;
    total += p;
    if (missing.empty()) break;
    int d = static_cast<int>(missing.size()) - 1;
    while (d >= 0 && ++fill[d] == cards[d]) fill[d--] = 0;
    if (d < 0) break;
  }
  if (total > 0.0)
    for (double& v : table.values) v /= total;
  return table;
}

// Exact entropy in nats by full enumeration.
inline double entropy(const bmn::DiscreteNetwork& net) {
  double h = 0.0;
  for (const auto& state : all_joint_states(node_cards(net))) {
    const double p = joint_prob(net, state);
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// Mixture likelihood by an explicit per-node walk over every submodel.
inline double bmn_log_likelihood(const bmn::MixtureNetwork& mix,
                                 const std::vector<int>& row) {
  double ll = 0.0;
  for (int i = 0; i < mix.node_count(); ++i) {
    double factor = 0.0;
    for (const bmn::Submodel& sub : mix.nodes[i]) {
      int k = 0;
      for (int par : sub.parents) k = k * mix.base.nodes[par].states + row[par];
      factor += sub.weight *
                sub.cpt.values[static_cast<std::size_t>(k) * sub.cpt.states + row[i]];
    }
    ll += std::log(factor);
  }
  return ll;
}

// Count-and-normalize MAP fit for complete data, with the ratio computed the
// same way the library computes it: theta = (prior + count) / column sum.
inline bmn::DiscreteNetwork map_fit(const bmn::DiscreteNetwork& skeleton,
                                    const bmn::Dataset& data, double pseudocount) {
  bmn::DiscreteNetwork out = skeleton;
  for (int i = 0; i < out.node_count(); ++i) {
    const int q = out.nodes[i].states;
    int r = 1;
    for (int par : out.nodes[i].parents) r *= out.nodes[par].states;
    std::vector<double> counts(static_cast<std::size_t>(q) * r, 0.0);
    for (const auto& row : data.cases) {
      int k = 0;
      for (int par : out.nodes[i].parents) k = k * out.nodes[par].states + row[par];
      counts[static_cast<std::size_t>(k) * q + row[i]] += 1.0;
    }
    out.nodes[i].cpt = bmn::CondTable(q, r);
    for (int k = 0; k < r; ++k) {
      double denom = 0.0;
      std::vector<double> numer(q);
      for (int j = 0; j < q; ++j) {
        numer[j] = pseudocount + counts[static_cast<std::size_t>(k) * q + j];
        denom += numer[j];
      }
      for (int j = 0; j < q; ++j)
        out.nodes[i].cpt.at(j, k) =
            denom == 0.0 ? 1.0 / q : numer[j] / denom;
    }
  }
  return out;
}

// Train score of the no-arc model fitted to its own training data.
inline double empty_model_train_score(const bmn::DiscreteNetwork& reference,
                                      const bmn::Dataset& data, double pseudocount) {
  bmn::DiscreteNetwork skel = reference.skeleton();
  for (auto& n : skel.nodes) n.parents.clear();
  const bmn::DiscreteNetwork fit = map_fit(skel, data, pseudocount);
  double total = 0.0;
  for (const auto& row : data.cases) total += std::log(joint_prob(fit, row));
  return total / data.case_count();
}

// Random test fixtures -------------------------------------------------------

inline bmn::DiscreteNetwork random_network(bmn::Rng& rng, int v, int max_card = 3,
                                           double edge_prob = 0.5) {
  bmn::DiscreteNetwork net;
  std::uniform_int_distribution<int> card(2, max_card);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < v; ++i) {
    bmn::NodeSpec node;
    node.name = "N" + std::to_string(i);
    node.states = card(rng);
    for (int p = 0; p < i; ++p)
      if (unit(rng) < edge_prob) node.parents.push_back(p);
    net.nodes.push_back(std::move(node));
  }
  return bmn::random_cpts(net, rng());
}

inline bmn::MixtureNetwork random_mixture(bmn::Rng& rng, int v, int max_card = 3,
                                          double edge_prob = 0.7) {
  const bmn::DiscreteNetwork base = random_network(rng, v, max_card, edge_prob);
  std::vector<int> caps;
  for (const auto& n : base.nodes) {
    std::uniform_int_distribution<int> cap(0, static_cast<int>(n.parents.size()));
    caps.push_back(cap(rng));
  }
  return bmn::random_mixture_params(bmn::make_mixture_skeleton(base, caps), rng());
}

inline bmn::Dataset knock_out(bmn::Dataset data, bmn::Rng& rng, double missing_prob) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& row : data.cases)
    for (auto& v : row)
      if (unit(rng) < missing_prob) v = bmn::kMissing;
  return data;
}

}  // namespace oracle
