#include "bmn/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "bmn/errors.hpp"
#include "bmn/rng.hpp"

namespace bmn {

std::vector<int> MixtureNetwork::submodel_positions(int node, int sub) const {
  const auto& candidates = base.nodes[node].parents;
  const auto& subset = nodes[node][sub].parents;
  std::vector<int> positions;
  positions.reserve(subset.size());
  for (int p : subset) {
    const auto it = std::find(candidates.begin(), candidates.end(), p);
    if (it == candidates.end())
      throw std::invalid_argument("mixture: node '" + base.nodes[node].name +
                                  "' has a submodel parent outside the candidate set");
    positions.push_back(static_cast<int>(it - candidates.begin()));
  }
  return positions;
}

void MixtureNetwork::validate_structure() const {
  base.validate_structure();
  if (nodes.size() != base.nodes.size())
    throw std::invalid_argument("mixture: submodel lists do not match the node count");
  for (int i = 0; i < node_count(); ++i) {
    if (nodes[i].empty())
      throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                  "' has no submodels");
    std::set<std::vector<int>> seen;
    for (int m = 0; m < submodel_count(i); ++m) {
      const auto positions = submodel_positions(i, m);
      if (!std::is_sorted(positions.begin(), positions.end()) ||
          std::adjacent_find(positions.begin(), positions.end()) != positions.end())
        throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                    "' has a submodel with out-of-order parents");
      if (!seen.insert(nodes[i][m].parents).second)
        throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                    "' has duplicate parent subsets");
    }
  }
}

void MixtureNetwork::validate() const {
  validate_structure();
  for (int i = 0; i < node_count(); ++i) {
    const int q = base.nodes[i].states;
    double weight_sum = 0.0;
    for (const Submodel& sub : nodes[i]) {
      if (!std::isfinite(sub.weight) || sub.weight < 0.0)
        throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                    "' has a negative or non-finite weight");
      weight_sum += sub.weight;
      int r = 1;
      for (int p : sub.parents) r *= base.nodes[p].states;
      if (sub.cpt.states != q || sub.cpt.configs != r ||
          sub.cpt.values.size() != static_cast<std::size_t>(q) * static_cast<std::size_t>(r))
        throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                    "' has a submodel CPT of the wrong shape");
      for (int k = 0; k < r; ++k) {
        double sum = 0.0;
        for (int j = 0; j < q; ++j) {
          const double v = sub.cpt.at(j, k);
          if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                        "' has a negative submodel probability");
          sum += v;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance)
          throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                      "' has an unnormalized submodel CPT column");
      }
    }
    if (std::abs(weight_sum - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("mixture: node '" + base.nodes[i].name +
                                  "' has weights that do not sum to 1");
  }
}

SubsetProjection::SubsetProjection(const std::vector<int>& candidate_cards,
                                   const std::vector<int>& keep_positions) {
  int last = -1;
  for (int pos : keep_positions) {
    if (pos <= last || pos >= static_cast<int>(candidate_cards.size()))
      throw std::invalid_argument("SubsetProjection: keep positions must be "
                                  "strictly increasing and in range");
    last = pos;
  }
  const ParentConfigCodec full(candidate_cards);
  std::vector<int> sub_cards;
  sub_cards.reserve(keep_positions.size());
  for (int pos : keep_positions) sub_cards.push_back(candidate_cards[pos]);
  const ParentConfigCodec sub(sub_cards);

  map_.resize(static_cast<std::size_t>(full.config_count()));
  std::vector<int> digits(candidate_cards.size());
  std::vector<int> kept(keep_positions.size());
  for (int k = 0; k < full.config_count(); ++k) {
    full.decode(k, digits);
    for (std::size_t t = 0; t < keep_positions.size(); ++t)
      kept[t] = digits[keep_positions[t]];
    map_[k] = sub.encode(kept);
  }
  subset_count_ = sub.config_count();
}

std::vector<std::vector<int>> enumerate_substructures(const std::vector<int>& candidates,
                                                      int cap) {
  const int p = static_cast<int>(candidates.size());
  if (cap < 0 || cap > p)
    throw std::invalid_argument("enumerate_substructures: cap out of range");
  std::vector<std::vector<int>> out;
  out.emplace_back();
  for (int size = 1; size <= cap; ++size) {
    std::vector<int> pos(size);
    std::iota(pos.begin(), pos.end(), 0);
    while (true) {
      std::vector<int> subset(size);
      for (int t = 0; t < size; ++t) subset[t] = candidates[pos[t]];
      out.push_back(std::move(subset));
      int t = size - 1;
      while (t >= 0 && pos[t] == p - size + t) --t;
      if (t < 0) break;
      ++pos[t];
      for (int u = t + 1; u < size; ++u) pos[u] = pos[u - 1] + 1;
    }
  }
  return out;
}

MixtureNetwork make_mixture_skeleton(const DiscreteNetwork& base,
                                     const std::vector<int>& caps) {
  base.validate_structure();
  if (caps.size() != base.nodes.size())
    throw std::invalid_argument("make_mixture_skeleton: need one cap per node");
  MixtureNetwork mix;
  mix.base = base.skeleton();
  mix.nodes.resize(base.nodes.size());
  for (int i = 0; i < base.node_count(); ++i) {
    if (caps[i] < 0)
      throw std::invalid_argument("make_mixture_skeleton: caps must be >= 0");
    const int cap = std::min<int>(caps[i], static_cast<int>(base.nodes[i].parents.size()));
    auto subsets = enumerate_substructures(base.nodes[i].parents, cap);
    const double weight = 1.0 / static_cast<double>(subsets.size());
    for (auto& subset : subsets) {
      Submodel sub;
      sub.parents = std::move(subset);
      sub.weight = weight;
      mix.nodes[i].push_back(std::move(sub));
    }
  }
  return mix;
}

MixtureNetwork make_singleton_mixture(const DiscreteNetwork& base) {
  base.validate_structure();
  MixtureNetwork mix;
  mix.base = base.skeleton();
  mix.nodes.resize(base.nodes.size());
  for (int i = 0; i < base.node_count(); ++i) {
    Submodel sub;
    sub.parents = base.nodes[i].parents;
    sub.weight = 1.0;
    mix.nodes[i].push_back(std::move(sub));
  }
  return mix;
}

MixtureNetwork random_mixture_params(const MixtureNetwork& structure, std::uint64_t seed) {
  structure.validate_structure();
  Rng rng(seed);
  MixtureNetwork mix = structure;
  for (int i = 0; i < mix.node_count(); ++i) {
    const int q = mix.base.nodes[i].states;
    std::vector<double> weights(mix.nodes[i].size());
    draw_dirichlet_uniform(rng, weights);
    for (int m = 0; m < mix.submodel_count(i); ++m) {
      Submodel& sub = mix.nodes[i][m];
      sub.weight = weights[m];
      int r = 1;
      for (int p : sub.parents) r *= mix.base.nodes[p].states;
      sub.cpt = CondTable(q, r);
      for (int k = 0; k < r; ++k) draw_dirichlet_uniform(rng, sub.cpt.column(k));
    }
  }
  return mix;
}

double bmn_log_likelihood(const MixtureNetwork& mix, const std::vector<int>& complete_case) {
  validate_case(mix.base, complete_case, /*allow_missing=*/false);
  double ll = 0.0;
  for (int i = 0; i < mix.node_count(); ++i) {
    double factor = 0.0;
    for (const Submodel& sub : mix.nodes[i]) {
      int k = 0;
      for (int p : sub.parents) k = k * mix.base.nodes[p].states + complete_case[p];
      factor += sub.weight * sub.cpt.at(complete_case[i], k);
    }
    ll += std::log(factor);
  }
  return ll;
}

DiscreteNetwork collapse(const MixtureNetwork& mix) {
  mix.validate();
  DiscreteNetwork out = mix.base;
  for (int i = 0; i < mix.node_count(); ++i) {
    const auto full_cards = mix.base.parent_cards(i);
    const int q = mix.base.nodes[i].states;
    const int r = mix.base.config_count(i);
    CondTable table(q, r);
    for (int m = 0; m < mix.submodel_count(i); ++m) {
      const Submodel& sub = mix.nodes[i][m];
      const SubsetProjection proj(full_cards, mix.submodel_positions(i, m));
      for (int k = 0; k < r; ++k) {
        const int kk = proj(k);
        for (int j = 0; j < q; ++j) table.at(j, k) += sub.weight * sub.cpt.at(j, kk);
      }
    }
    out.nodes[i].cpt = std::move(table);
  }
  return out;
}

std::vector<WeightedNetwork> build_restricted_mbn(const MixtureNetwork& mix) {
  mix.validate();
  const int v = mix.node_count();
  long long total = 1;
  for (int i = 0; i < v; ++i) {
    total *= mix.submodel_count(i);
    if (total > 100000)
      throw GuardError("build_restricted_mbn: cross-product exceeds 100000 structures");
  }
  std::vector<WeightedNetwork> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> choice(static_cast<std::size_t>(v), 0);
  while (true) {
    WeightedNetwork wn;
    wn.weight = 1.0;
    wn.net.nodes.reserve(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) {
      const Submodel& sub = mix.nodes[i][choice[i]];
      wn.weight *= sub.weight;
      NodeSpec node;
      node.name = mix.base.nodes[i].name;
      node.states = mix.base.nodes[i].states;
      node.parents = sub.parents;
      node.cpt = sub.cpt;
      wn.net.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(wn));
    int d = v - 1;
    while (d >= 0 && ++choice[d] == mix.submodel_count(d)) {
      choice[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return out;
}

double mbn_log_likelihood(const std::vector<WeightedNetwork>& mbn,
                          const std::vector<int>& complete_case) {
  if (mbn.empty()) throw std::invalid_argument("mbn_log_likelihood: empty mixture");
  validate_case(mbn.front().net, complete_case, /*allow_missing=*/false);
  double total = 0.0;
  for (const WeightedNetwork& wn : mbn) {
    double p = 1.0;
    for (int i = 0; i < wn.net.node_count(); ++i)
      p *= wn.net.nodes[i].cpt.at(complete_case[i], parent_config_of(wn.net, i, complete_case));
    total += wn.weight * p;
  }
  return std::log(total);
}

}  // namespace bmn
