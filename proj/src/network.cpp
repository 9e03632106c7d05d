#include "bmn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "bmn/rng.hpp"

namespace bmn {

int DiscreteNetwork::index_of(std::string_view name) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes[i].name == name) return i;
  return -1;
}

std::vector<int> DiscreteNetwork::parent_cards(int node) const {
  std::vector<int> cards;
  cards.reserve(nodes[node].parents.size());
  for (int p : nodes[node].parents) cards.push_back(nodes[p].states);
  return cards;
}

ParentConfigCodec DiscreteNetwork::parent_codec(int node) const {
  return ParentConfigCodec(parent_cards(node));
}

int DiscreteNetwork::config_count(int node) const {
  int r = 1;
  for (int p : nodes[node].parents) r *= nodes[p].states;
  return r;
}

bool DiscreteNetwork::has_cpts() const {
  return std::all_of(nodes.begin(), nodes.end(),
                     [](const NodeSpec& n) { return !n.cpt.empty(); });
}

DiscreteNetwork DiscreteNetwork::skeleton() const {
  DiscreteNetwork out = *this;
  for (auto& n : out.nodes) n.cpt = CondTable();
  return out;
}

void DiscreteNetwork::validate_structure() const {
  std::unordered_set<std::string_view> seen;
  for (int i = 0; i < node_count(); ++i) {
    const NodeSpec& n = nodes[i];
    if (n.name.empty())
      throw std::invalid_argument("network: node " + std::to_string(i) + " has an empty name");
    if (!seen.insert(n.name).second)
      throw std::invalid_argument("network: duplicate node name '" + n.name + "'");
    if (n.states < 2)
      throw std::invalid_argument("network: node '" + n.name + "' needs at least 2 states");
    std::vector<bool> used(static_cast<std::size_t>(i), false);
    for (int p : n.parents) {
      if (p < 0 || p >= i)
        throw std::invalid_argument("network: node '" + n.name +
                                    "' has a parent that does not precede it in the ordering");
      if (used[static_cast<std::size_t>(p)])
        throw std::invalid_argument("network: node '" + n.name + "' lists a parent twice");
      used[static_cast<std::size_t>(p)] = true;
    }
  }
}

void DiscreteNetwork::validate() const {
  validate_structure();
  for (int i = 0; i < node_count(); ++i) {
    const NodeSpec& n = nodes[i];
    const int r = config_count(i);
    if (n.cpt.states != n.states || n.cpt.configs != r ||
        n.cpt.values.size() != static_cast<std::size_t>(n.states) * static_cast<std::size_t>(r))
      throw std::invalid_argument("network: node '" + n.name + "' has a CPT of the wrong shape");
    for (int k = 0; k < r; ++k) {
      double sum = 0.0;
      for (int j = 0; j < n.states; ++j) {
        const double v = n.cpt.at(j, k);
        if (!std::isfinite(v) || v < 0.0)
          throw std::invalid_argument("network: node '" + n.name +
                                      "' has a negative or non-finite probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kProbabilityTolerance)
        throw std::invalid_argument("network: node '" + n.name + "' CPT column " +
                                    std::to_string(k) + " does not sum to 1");
    }
  }
}

bool case_complete(const std::vector<int>& row) {
  return std::none_of(row.begin(), row.end(), [](int v) { return v == kMissing; });
}

bool Dataset::complete() const {
  return std::all_of(cases.begin(), cases.end(), case_complete);
}

void validate_case(const DiscreteNetwork& net, const std::vector<int>& row,
                   bool allow_missing) {
  if (static_cast<int>(row.size()) != net.node_count())
    throw std::invalid_argument("case has " + std::to_string(row.size()) +
                                " entries for a " + std::to_string(net.node_count()) +
                                "-node network");
  for (int i = 0; i < net.node_count(); ++i) {
    const int v = row[i];
    if (v == kMissing) {
      if (!allow_missing)
        throw std::invalid_argument("case has a missing entry for node '" +
                                    net.nodes[i].name + "'");
      continue;
    }
    if (v < 0 || v >= net.nodes[i].states)
      throw std::invalid_argument("case state " + std::to_string(v) +
                                  " is out of range for node '" + net.nodes[i].name + "'");
  }
}

void validate_dataset(const DiscreteNetwork& net, const Dataset& data,
                      bool allow_missing) {
  if (static_cast<int>(data.names.size()) != net.node_count())
    throw std::invalid_argument("dataset has the wrong number of columns");
  for (int i = 0; i < net.node_count(); ++i)
    if (data.names[i] != net.nodes[i].name)
      throw std::invalid_argument("dataset column '" + data.names[i] +
                                  "' does not match node '" + net.nodes[i].name +
                                  "' (use align_dataset)");
  for (const auto& row : data.cases) validate_case(net, row, allow_missing);
}

Dataset align_dataset(const Dataset& data, const DiscreteNetwork& net) {
  if (static_cast<int>(data.names.size()) != net.node_count())
    throw std::invalid_argument("align_dataset: column count does not match node count");
  std::unordered_map<std::string_view, int> columns;
  for (int c = 0; c < static_cast<int>(data.names.size()); ++c)
    if (!columns.emplace(data.names[c], c).second)
      throw std::invalid_argument("align_dataset: duplicate dataset column '" +
                                  data.names[c] + "'");
  std::vector<int> source(net.node_count());
  for (int i = 0; i < net.node_count(); ++i) {
    auto it = columns.find(net.nodes[i].name);
    if (it == columns.end())
      throw std::invalid_argument("align_dataset: dataset lacks a column for node '" +
                                  net.nodes[i].name + "'");
    source[i] = it->second;
  }
  Dataset out;
  out.names.reserve(net.node_count());
  for (const auto& n : net.nodes) out.names.push_back(n.name);
  out.cases.reserve(data.cases.size());
  for (const auto& row : data.cases) {
    if (row.size() != data.names.size())
      throw std::invalid_argument("align_dataset: ragged dataset row");
    std::vector<int> aligned(net.node_count());
    for (int i = 0; i < net.node_count(); ++i) aligned[i] = row[source[i]];
    out.cases.push_back(std::move(aligned));
  }
  return out;
}

int parent_config_of(const DiscreteNetwork& net, int node, const std::vector<int>& row) {
  int config = 0;
  for (int p : net.nodes[node].parents) {
    const int v = row[p];
    if (v == kMissing)
      throw std::invalid_argument("parent_config_of: parent '" + net.nodes[p].name +
                                  "' is unobserved");
    config = config * net.nodes[p].states + v;
  }
  return config;
}

double joint_log_likelihood(const DiscreteNetwork& net, const std::vector<int>& complete_case) {
  validate_case(net, complete_case, /*allow_missing=*/false);
  double ll = 0.0;
  for (int i = 0; i < net.node_count(); ++i) {
    const int k = parent_config_of(net, i, complete_case);
    ll += std::log(net.nodes[i].cpt.at(complete_case[i], k));
  }
  return ll;
}

double dataset_score(const DiscreteNetwork& net, const Dataset& data) {
  if (data.case_count() == 0)
    throw std::invalid_argument("dataset_score: empty dataset");
  validate_dataset(net, data, /*allow_missing=*/false);
  double total = 0.0;
  for (const auto& row : data.cases) {
    double ll = 0.0;
    for (int i = 0; i < net.node_count(); ++i)
      ll += std::log(net.nodes[i].cpt.at(row[i], parent_config_of(net, i, row)));
    total += ll;
  }
  return total / data.case_count();
}

Dataset sample(const DiscreteNetwork& net, int n, std::uint64_t seed) {
  net.validate();
  if (n < 1) throw std::invalid_argument("sample: need at least one case");
  Rng rng(seed);
  Dataset out;
  out.names.reserve(net.node_count());
  for (const auto& node : net.nodes) out.names.push_back(node.name);
  out.cases.assign(static_cast<std::size_t>(n),
                   std::vector<int>(static_cast<std::size_t>(net.node_count()), 0));
  for (auto& row : out.cases) {
    for (int i = 0; i < net.node_count(); ++i) {
      const int k = parent_config_of(net, i, row);  // parents precede i, already drawn
      row[i] = draw_categorical(rng, net.nodes[i].cpt.column(k));
    }
  }
  return out;
}

DiscreteNetwork random_cpts(const DiscreteNetwork& skeleton, std::uint64_t seed) {
  skeleton.validate_structure();
  Rng rng(seed);
  DiscreteNetwork out = skeleton;
  for (int i = 0; i < out.node_count(); ++i) {
    NodeSpec& n = out.nodes[i];
    n.cpt = CondTable(n.states, out.config_count(i));
    for (int k = 0; k < n.cpt.configs; ++k) draw_dirichlet_uniform(rng, n.cpt.column(k));
  }
  return out;
}

DiscreteNetwork uniform_cpts(const DiscreteNetwork& skeleton) {
  skeleton.validate_structure();
  DiscreteNetwork out = skeleton;
  for (int i = 0; i < out.node_count(); ++i) {
    NodeSpec& n = out.nodes[i];
    n.cpt = CondTable(n.states, out.config_count(i), 1.0 / n.states);
  }
  return out;
}

}  // namespace bmn
