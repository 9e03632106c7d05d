#include "bmn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <stdexcept>

#include "bmn/errors.hpp"

namespace bmn {
namespace {

constexpr std::size_t kMaxFactorSize = std::size_t{1} << 24;

// Dense factor over a sorted set of node indices; values use mixed-radix
// indexing with the first scope variable as the most significant digit.
struct Factor {
  std::vector<int> vars;
  std::vector<int> cards;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  int position_of(int var) const {
    for (std::size_t p = 0; p < vars.size(); ++p)
      if (vars[p] == var) return static_cast<int>(p);
    return -1;
  }
};

std::vector<std::size_t> strides_of(const std::vector<int>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  for (int p = static_cast<int>(cards.size()) - 2; p >= 0; --p)
    strides[p] = strides[p + 1] * static_cast<std::size_t>(cards[p + 1]);
  return strides;
}

// Advances a mixed-radix odometer; returns false once it wraps around.
bool advance(std::vector<int>& digits, const std::vector<int>& cards) {
  for (int d = static_cast<int>(digits.size()) - 1; d >= 0; --d) {
    if (++digits[d] < cards[d]) return true;
    digits[d] = 0;
  }
  return false;
}

Factor node_factor(const DiscreteNetwork& net, int node) {
  const NodeSpec& spec = net.nodes[node];
  Factor f;
  f.vars = spec.parents;
  f.vars.push_back(node);
  std::sort(f.vars.begin(), f.vars.end());
  f.cards.reserve(f.vars.size());
  for (int v : f.vars) f.cards.push_back(net.nodes[v].states);

  std::size_t size = 1;
  for (int c : f.cards) size *= static_cast<std::size_t>(c);
  f.values.resize(size);

  std::vector<int> parent_pos;
  parent_pos.reserve(spec.parents.size());
  for (int p : spec.parents) parent_pos.push_back(f.position_of(p));
  const int node_pos = f.position_of(node);

  std::vector<int> digits(f.vars.size(), 0);
  std::size_t idx = 0;
  do {
    int k = 0;
    for (std::size_t t = 0; t < spec.parents.size(); ++t)
      k = k * net.nodes[spec.parents[t]].states + digits[parent_pos[t]];
    f.values[idx++] = spec.cpt.at(digits[node_pos], k);
  } while (advance(digits, f.cards));
  return f;
}

Factor reduce(const Factor& f, int var, int state) {
  const int pos = f.position_of(var);
  if (pos < 0) return f;
  Factor out;
  out.vars = f.vars;
  out.cards = f.cards;
  out.vars.erase(out.vars.begin() + pos);
  out.cards.erase(out.cards.begin() + pos);
  std::size_t size = 1;
  for (int c : out.cards) size *= static_cast<std::size_t>(c);
  out.values.resize(size);

  const auto in_strides = strides_of(f.cards);
  std::vector<int> digits(out.vars.size(), 0);
  std::size_t idx = 0;
  if (out.vars.empty()) {
    out.values[0] = f.values[static_cast<std::size_t>(state) * in_strides[pos]];
    return out;
  }
  do {
    std::size_t src = static_cast<std::size_t>(state) * in_strides[pos];
    for (std::size_t d = 0; d < digits.size(); ++d) {
      const std::size_t orig = d < static_cast<std::size_t>(pos) ? d : d + 1;
      src += static_cast<std::size_t>(digits[d]) * in_strides[orig];
    }
    out.values[idx++] = f.values[src];
  } while (advance(digits, out.cards));
  return out;
}

Factor product(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  out.cards.reserve(out.vars.size());

  const auto a_strides = strides_of(a.cards);
  const auto b_strides = strides_of(b.cards);
  std::vector<std::size_t> sa(out.vars.size(), 0), sb(out.vars.size(), 0);
  std::size_t size = 1;
  for (std::size_t d = 0; d < out.vars.size(); ++d) {
    const int var = out.vars[d];
    const int pa = a.position_of(var);
    const int pb = b.position_of(var);
    const int card = pa >= 0 ? a.cards[pa] : b.cards[pb];
    out.cards.push_back(card);
    if (pa >= 0) sa[d] = a_strides[pa];
    if (pb >= 0) sb[d] = b_strides[pb];
    size *= static_cast<std::size_t>(card);
    if (size > kMaxFactorSize)
      throw GuardError("inference: intermediate factor too large");
  }
  out.values.resize(size);

  if (out.vars.empty()) {
    out.values[0] = a.values[0] * b.values[0];
    return out;
  }
  std::vector<int> digits(out.vars.size(), 0);
  std::size_t idx = 0;
  do {
    std::size_t ia = 0, ib = 0;
    for (std::size_t d = 0; d < digits.size(); ++d) {
      ia += static_cast<std::size_t>(digits[d]) * sa[d];
      ib += static_cast<std::size_t>(digits[d]) * sb[d];
    }
    out.values[idx++] = a.values[ia] * b.values[ib];
  } while (advance(digits, out.cards));
  return out;
}

Factor sum_out(const Factor& f, int var) {
  const int pos = f.position_of(var);
  if (pos < 0) return f;
  Factor out;
  out.vars = f.vars;
  out.cards = f.cards;
  out.vars.erase(out.vars.begin() + pos);
  out.cards.erase(out.cards.begin() + pos);
  std::size_t size = 1;
  for (int c : out.cards) size *= static_cast<std::size_t>(c);
  out.values.assign(size, 0.0);

  const auto in_strides = strides_of(f.cards);
  const auto out_strides = strides_of(out.cards);
  std::vector<int> digits(f.vars.size(), 0);
  std::size_t idx = 0;
  do {
    std::size_t dst = 0;
    for (std::size_t d = 0; d < digits.size(); ++d) {
      if (d == static_cast<std::size_t>(pos)) continue;
      const std::size_t od = d < static_cast<std::size_t>(pos) ? d : d - 1;
      dst += static_cast<std::size_t>(digits[d]) * out_strides[od];
    }
    out.values[dst] += f.values[idx++];
  } while (advance(digits, f.cards));
  return out;
}

}  // namespace

CondTable family_posterior(const DiscreteNetwork& net, const std::vector<int>& row,
                           int node) {
  if (node < 0 || node >= net.node_count())
    throw std::invalid_argument("family_posterior: node index out of range");
  validate_case(net, row, /*allow_missing=*/true);

  const NodeSpec& spec = net.nodes[node];
  const int q = spec.states;
  const int r = net.config_count(node);
  CondTable table(q, r);

  bool family_observed = row[node] != kMissing;
  for (int p : spec.parents) family_observed = family_observed && row[p] != kMissing;
  if (family_observed) {
    table.at(row[node], parent_config_of(net, node, row)) = 1.0;
    return table;
  }

  // Unobserved members of the family, in ascending node order.
  std::vector<int> keep;
  if (row[node] == kMissing) keep.push_back(node);
  for (int p : spec.parents)
    if (row[p] == kMissing) keep.push_back(p);
  std::sort(keep.begin(), keep.end());

  std::vector<Factor> factors;
  factors.reserve(net.node_count());
  for (int f = 0; f < net.node_count(); ++f) {
    Factor nf = node_factor(net, f);
    for (int v : std::vector<int>(nf.vars)) {
      if (row[v] != kMissing) nf = reduce(nf, v, row[v]);
    }
    factors.push_back(std::move(nf));
  }

  const auto in_keep = [&](int v) {
    return std::binary_search(keep.begin(), keep.end(), v);
  };
  for (int v = 0; v < net.node_count(); ++v) {
    if (row[v] != kMissing || in_keep(v)) continue;
    Factor combined;
    combined.values = {1.0};
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (auto& f : factors) {
      if (f.position_of(v) >= 0)
        combined = product(combined, f);
      else
        rest.push_back(std::move(f));
    }
    rest.push_back(sum_out(combined, v));
    factors = std::move(rest);
  }

  Factor joint;
  joint.values = {1.0};
  for (const auto& f : factors) joint = product(joint, f);

  // Map each family member to either its observed state or its digit
  // position in the joint factor over `keep`.
  std::vector<int> family = spec.parents;
  family.push_back(node);
  std::vector<int> digit_pos(family.size(), -1);
  for (std::size_t t = 0; t < family.size(); ++t)
    if (row[family[t]] == kMissing) digit_pos[t] = joint.position_of(family[t]);

  const auto strides = strides_of(joint.cards);
  const double total = [&] {
    double s = 0.0;
    for (double v : joint.values) s += v;
    return s;
  }();
  const bool degenerate = !(total > 0.0) || !std::isfinite(total);
  if (degenerate)
    std::cerr << "family_posterior: evidence has zero probability; "
                 "falling back to a uniform posterior\n";

  std::vector<int> digits(joint.vars.size(), 0);
  do {
    int j = row[node];
    int k = 0;
    for (std::size_t t = 0; t + 1 < family.size(); ++t) {
      const int parent = family[t];
      const int v = digit_pos[t] >= 0 ? digits[digit_pos[t]] : row[parent];
      k = k * net.nodes[parent].states + v;
    }
    if (j == kMissing) j = digits[digit_pos.back()];
    std::size_t idx = 0;
    for (std::size_t d = 0; d < digits.size(); ++d)
      idx += static_cast<std::size_t>(digits[d]) * strides[d];
    table.at(j, k) = degenerate ? 1.0 / static_cast<double>(joint.size())
                                : joint.values[idx] / total;
  } while (advance(digits, joint.cards));
  return table;
}

double observed_case_log_likelihood(const DiscreteNetwork& net,
                                    const std::vector<int>& row) {
  validate_case(net, row, /*allow_missing=*/true);
  if (case_complete(row)) {
    double ll = 0.0;
    for (int i = 0; i < net.node_count(); ++i)
      ll += std::log(net.nodes[i].cpt.at(row[i], parent_config_of(net, i, row)));
    return ll;
  }
  std::vector<Factor> factors;
  factors.reserve(net.node_count());
  for (int f = 0; f < net.node_count(); ++f) {
    Factor nf = node_factor(net, f);
    for (int v : std::vector<int>(nf.vars))
      if (row[v] != kMissing) nf = reduce(nf, v, row[v]);
    factors.push_back(std::move(nf));
  }
  for (int v = 0; v < net.node_count(); ++v) {
    if (row[v] != kMissing) continue;
    Factor combined;
    combined.values = {1.0};
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (auto& f : factors) {
      if (f.position_of(v) >= 0)
        combined = product(combined, f);
      else
        rest.push_back(std::move(f));
    }
    rest.push_back(sum_out(combined, v));
    factors = std::move(rest);
  }
  double total = 1.0;
  for (const Factor& f : factors) total *= f.values[0];
  return std::log(total);
}

double observed_data_score(const DiscreteNetwork& net, const Dataset& data) {
  if (data.case_count() == 0)
    throw std::invalid_argument("observed_data_score: empty dataset");
  validate_dataset(net, data, /*allow_missing=*/true);
  double total = 0.0;
  for (const auto& row : data.cases) total += observed_case_log_likelihood(net, row);
  return total / data.case_count();
}

FamilyCountTable expected_family_counts(const DiscreteNetwork& net, const Dataset& data) {
  validate_dataset(net, data, /*allow_missing=*/true);
  FamilyCountTable counts(static_cast<std::size_t>(net.node_count()));
  for (int i = 0; i < net.node_count(); ++i)
    counts[i] = CondTable(net.nodes[i].states, net.config_count(i));

  for (const auto& row : data.cases) {
    if (case_complete(row)) {
      for (int i = 0; i < net.node_count(); ++i)
        counts[i].at(row[i], parent_config_of(net, i, row)) += 1.0;
      continue;
    }
    for (int i = 0; i < net.node_count(); ++i) {
      const CondTable post = family_posterior(net, row, i);
      for (std::size_t t = 0; t < post.values.size(); ++t)
        counts[i].values[t] += post.values[t];
    }
  }
  return counts;
}

}  // namespace bmn
