#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bmn {

// Probability or count table over (state j, parent configuration k), stored
// config-major: values[config * states + state]. The same shape serves CPTs,
// family count tables and prior count tables.
struct CondTable {
  int states = 0;
  int configs = 0;
  std::vector<double> values;

  CondTable() = default;
  CondTable(int states_, int configs_, double fill = 0.0)
      : states(states_),
        configs(configs_),
        values(static_cast<std::size_t>(states_) * static_cast<std::size_t>(configs_), fill) {}

  bool empty() const { return values.empty(); }

  std::size_t index(int state, int config) const {
    return static_cast<std::size_t>(config) * static_cast<std::size_t>(states) +
           static_cast<std::size_t>(state);
  }
  double& at(int state, int config) { return values[index(state, config)]; }
  double at(int state, int config) const { return values[index(state, config)]; }

  std::span<double> column(int config) {
    return {values.data() + index(0, config), static_cast<std::size_t>(states)};
  }
  std::span<const double> column(int config) const {
    return {values.data() + index(0, config), static_cast<std::size_t>(states)};
  }

  double column_sum(int config) const {
    double sum = 0.0;
    for (double v : column(config)) sum += v;
    return sum;
  }
  double total() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
};

// Bijection between a joint parent-state tuple and the flat configuration
// index k. Mixed radix with the FIRST listed parent as the most significant
// digit; CPT files rely on this ordering.
class ParentConfigCodec {
 public:
  ParentConfigCodec() = default;

  explicit ParentConfigCodec(std::vector<int> cardinalities)
      : cards_(std::move(cardinalities)) {
    strides_.assign(cards_.size(), 1);
    long long count = 1;
    for (int p = static_cast<int>(cards_.size()) - 1; p >= 0; --p) {
      if (cards_[p] < 1)
        throw std::invalid_argument("ParentConfigCodec: cardinality must be >= 1");
      strides_[p] = static_cast<int>(count);
      count *= cards_[p];
      if (count > (1LL << 30))
        throw std::invalid_argument("ParentConfigCodec: configuration space too large");
    }
    count_ = static_cast<int>(count);
  }

  int arity() const { return static_cast<int>(cards_.size()); }
  int config_count() const { return count_; }
  const std::vector<int>& cardinalities() const { return cards_; }

  int encode(std::span<const int> states) const {
    if (states.size() != cards_.size())
      throw std::invalid_argument("ParentConfigCodec::encode: arity mismatch");
    int config = 0;
    for (std::size_t p = 0; p < cards_.size(); ++p) {
      if (states[p] < 0 || states[p] >= cards_[p])
        throw std::invalid_argument("ParentConfigCodec::encode: state out of range");
      config += states[p] * strides_[p];
    }
    return config;
  }

  int digit(int config, int pos) const { return (config / strides_[pos]) % cards_[pos]; }

  void decode(int config, std::span<int> out) const {
    for (std::size_t p = 0; p < cards_.size(); ++p)
      out[p] = digit(config, static_cast<int>(p));
  }
  std::vector<int> decode(int config) const {
    std::vector<int> out(cards_.size());
    decode(config, out);
    return out;
  }

 private:
  std::vector<int> cards_;
  std::vector<int> strides_;
  int count_ = 1;
};

}  // namespace bmn
