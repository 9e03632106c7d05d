#include "bmn/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace bmn {
namespace {

constexpr double kScoreDecreaseWarning = 1e-6;

bool family_observed(const DiscreteNetwork& net, const std::vector<int>& row, int node) {
  if (row[node] == kMissing) return false;
  for (int p : net.nodes[node].parents)
    if (row[p] == kMissing) return false;
  return true;
}

int subset_config_of(const DiscreteNetwork& base, const Submodel& sub,
                     const std::vector<int>& row) {
  int k = 0;
  for (int p : sub.parents) k = k * base.nodes[p].states + row[p];
  return k;
}

void normalize_responsibility(std::vector<double>& r, FitDiagnostics* diag) {
  double sum = 0.0;
  for (double v : r) sum += v;
  if (sum > 0.0 && std::isfinite(sum)) {
    for (double& v : r) v /= sum;
  } else {
    std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(r.size()));
    if (diag) ++diag->responsibility_fallbacks;
  }
}

// Raw family tallies; rows must be complete. Only table shapes are read from
// the structure, so a skeleton works.
FamilyCountTable tabulate_family_counts(const DiscreteNetwork& structure,
                                        const Dataset& data) {
  FamilyCountTable counts(static_cast<std::size_t>(structure.node_count()));
  for (int i = 0; i < structure.node_count(); ++i)
    counts[i] = CondTable(structure.nodes[i].states, structure.config_count(i));
  for (const auto& row : data.cases)
    for (int i = 0; i < structure.node_count(); ++i)
      counts[i].at(row[i], parent_config_of(structure, i, row)) += 1.0;
  return counts;
}

std::vector<double> weight_entropies(const MixtureNetwork& mix) {
  std::vector<double> out;
  out.reserve(mix.nodes.size());
  for (const auto& subs : mix.nodes) {
    double h = 0.0;
    for (const Submodel& sub : subs)
      if (sub.weight > 0.0) h -= sub.weight * std::log(sub.weight);
    out.push_back(h);
  }
  return out;
}

std::vector<std::vector<SubsetProjection>> build_projections(const MixtureNetwork& mix) {
  std::vector<std::vector<SubsetProjection>> proj(mix.nodes.size());
  for (int i = 0; i < mix.node_count(); ++i) {
    const auto full_cards = mix.base.parent_cards(i);
    proj[i].reserve(mix.nodes[i].size());
    for (int m = 0; m < mix.submodel_count(i); ++m)
      proj[i].emplace_back(full_cards, mix.submodel_positions(i, m));
  }
  return proj;
}

// One E pass over the data accumulating responsibility sums A[node][sub];
// `collapsed` provides family posteriors for incomplete rows.
std::vector<std::vector<double>> accumulate_resp_sums(
    const MixtureNetwork& mix, const DiscreteNetwork& collapsed, const Dataset& data,
    const std::vector<std::vector<SubsetProjection>>& proj, FitDiagnostics* diag) {
  const int v = mix.node_count();
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) sums[i].assign(mix.nodes[i].size(), 0.0);

  std::vector<double> r;
  for (const auto& row : data.cases) {
    for (int i = 0; i < v; ++i) {
      const auto& subs = mix.nodes[i];
      r.assign(subs.size(), 0.0);
      if (family_observed(mix.base, row, i)) {
        for (std::size_t m = 0; m < subs.size(); ++m)
          r[m] = subs[m].weight *
                 subs[m].cpt.at(row[i], subset_config_of(mix.base, subs[m], row));
      } else {
        const CondTable post = family_posterior(collapsed, row, i);
        for (std::size_t m = 0; m < subs.size(); ++m) {
          const auto& pmap = proj[i][m].map();
          double acc = 0.0;
          for (int k = 0; k < post.configs; ++k) {
            const int kk = pmap[k];
            for (int j = 0; j < post.states; ++j)
              acc += post.at(j, k) * subs[m].cpt.at(j, kk);
          }
          r[m] = subs[m].weight * acc;
        }
      }
      normalize_responsibility(r, diag);
      for (std::size_t m = 0; m < subs.size(); ++m) sums[i][m] += r[m];
    }
  }
  return sums;
}

void check_same_structure(const MixtureNetwork& a, const MixtureNetwork& b) {
  bool same = a.node_count() == b.node_count();
  for (int i = 0; same && i < a.node_count(); ++i) {
    same = a.base.nodes[i].name == b.base.nodes[i].name &&
           a.base.nodes[i].states == b.base.nodes[i].states &&
           a.base.nodes[i].parents == b.base.nodes[i].parents &&
           a.nodes[i].size() == b.nodes[i].size();
    for (std::size_t m = 0; same && m < a.nodes[i].size(); ++m)
      same = a.nodes[i][m].parents == b.nodes[i][m].parents;
  }
  if (!same)
    throw std::invalid_argument("objective_value: mixtures have different structures");
}

}  // namespace

void PriorSpec::validate() const {
  if (!std::isfinite(family_pseudocount) || family_pseudocount < 0.0)
    throw std::invalid_argument("priors: family pseudocount must be >= 0");
  if (!std::isfinite(weight_pseudocount) || weight_pseudocount < 0.0)
    throw std::invalid_argument("priors: weight pseudocount must be >= 0");
}

CondTable PriorSpec::family_prior_for(const DiscreteNetwork& base, int node) const {
  const int q = base.nodes[node].states;
  const int r = base.config_count(node);
  if (family_tables.empty()) return CondTable(q, r, family_pseudocount);
  if (static_cast<int>(family_tables.size()) != base.node_count())
    throw std::invalid_argument("priors: need one family table per node");
  const CondTable& t = family_tables[node];
  if (t.states != q || t.configs != r)
    throw std::invalid_argument("priors: family table for node '" +
                                base.nodes[node].name + "' has the wrong shape");
  for (double v : t.values)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("priors: family pseudocounts must be >= 0");
  return t;
}

std::vector<double> PriorSpec::weight_prior_for(const MixtureNetwork& mix, int node) const {
  const std::size_t m = mix.nodes[node].size();
  if (weight_tables.empty()) return std::vector<double>(m, weight_pseudocount);
  if (weight_tables.size() != mix.nodes.size())
    throw std::invalid_argument("priors: need one weight table per node");
  const auto& alpha = weight_tables[node];
  if (alpha.size() != m)
    throw std::invalid_argument("priors: weight table for node '" +
                                mix.base.nodes[node].name + "' has the wrong length");
  for (double a : alpha)
    if (!std::isfinite(a) || a < 0.0)
      throw std::invalid_argument("priors: weight pseudocounts must be >= 0");
  return alpha;
}

CondTable marginalize_counts(const CondTable& full_counts, const SubsetProjection& proj) {
  if (full_counts.configs != proj.full_config_count())
    throw std::invalid_argument("marginalize_counts: table and projection disagree");
  CondTable out(full_counts.states, proj.subset_config_count());
  for (int k = 0; k < full_counts.configs; ++k) {
    const int kk = proj(k);
    for (int j = 0; j < full_counts.states; ++j) out.at(j, kk) += full_counts.at(j, k);
  }
  return out;
}

CondTable theta_update(const CondTable& counts, const CondTable& priors,
                       FitDiagnostics* diag) {
  if (counts.states != priors.states || counts.configs != priors.configs)
    throw std::invalid_argument("theta_update: counts and priors have different shapes");
  CondTable theta(counts.states, counts.configs);
  std::vector<double> numer(static_cast<std::size_t>(counts.states));
  for (int k = 0; k < counts.configs; ++k) {
    double denom = 0.0;
    for (int j = 0; j < counts.states; ++j) {
      const double c = counts.at(j, k);
      const double p0 = priors.at(j, k);
      if (!std::isfinite(c) || c < 0.0 || !std::isfinite(p0) || p0 < 0.0)
        throw std::invalid_argument("theta_update: negative or non-finite count");
      numer[j] = p0 + c;
      denom += numer[j];
    }
    if (denom == 0.0) {
      for (int j = 0; j < counts.states; ++j)
        theta.at(j, k) = 1.0 / static_cast<double>(counts.states);
      if (diag) ++diag->zero_denominator_columns;
    } else {
      for (int j = 0; j < counts.states; ++j) theta.at(j, k) = numer[j] / denom;
    }
  }
  return theta;
}

std::vector<std::vector<std::vector<double>>> responsibilities(
    const MixtureNetwork& mix,
    const std::vector<std::vector<CondTable>>& family_posteriors,
    FitDiagnostics* diag) {
  mix.validate();
  const int v = mix.node_count();
  const auto proj = build_projections(mix);

  std::vector<std::vector<std::vector<double>>> out(family_posteriors.size());
  for (std::size_t d = 0; d < family_posteriors.size(); ++d) {
    if (static_cast<int>(family_posteriors[d].size()) != v)
      throw std::invalid_argument("responsibilities: need one posterior per node");
    out[d].resize(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) {
      const CondTable& post = family_posteriors[d][i];
      if (post.states != mix.base.nodes[i].states ||
          post.configs != mix.base.config_count(i))
        throw std::invalid_argument("responsibilities: posterior has the wrong shape");
      const auto& subs = mix.nodes[i];
      std::vector<double> r(subs.size(), 0.0);
      for (std::size_t m = 0; m < subs.size(); ++m) {
        const auto& pmap = proj[i][m].map();
        double acc = 0.0;
        for (int k = 0; k < post.configs; ++k) {
          const int kk = pmap[k];
          for (int j = 0; j < post.states; ++j)
            acc += post.at(j, k) * subs[m].cpt.at(j, kk);
        }
        r[m] = subs[m].weight * acc;
      }
      normalize_responsibility(r, diag);
      out[d][i] = std::move(r);
    }
  }
  return out;
}

std::vector<double> psi_update(std::span<const double> resp_sums,
                               std::span<const double> alpha) {
  if (resp_sums.empty() || resp_sums.size() != alpha.size())
    throw std::invalid_argument("psi_update: mismatched or empty inputs");
  double denom = 0.0;
  for (std::size_t m = 0; m < resp_sums.size(); ++m) {
    if (resp_sums[m] < 0.0 || alpha[m] < 0.0)
      throw std::invalid_argument("psi_update: negative input");
    denom += alpha[m] + resp_sums[m];
  }
  if (denom <= 0.0) throw std::invalid_argument("psi_update: zero denominator");
  std::vector<double> psi(resp_sums.size());
  for (std::size_t m = 0; m < resp_sums.size(); ++m)
    psi[m] = (alpha[m] + resp_sums[m]) / denom;
  return psi;
}

FitReport em_fit(const MixtureNetwork& structure, const Dataset& data,
                 const PriorSpec& priors, const EmConfig& config) {
  structure.validate_structure();
  if (data.case_count() == 0) throw std::invalid_argument("em_fit: empty dataset");
  if (config.max_iters < 1) throw std::invalid_argument("em_fit: max_iters must be >= 1");
  if (!(config.rel_tol >= 0.0)) throw std::invalid_argument("em_fit: rel_tol must be >= 0");
  priors.validate();

  const Dataset train = align_dataset(data, structure.base);
  validate_dataset(structure.base, train, /*allow_missing=*/true);

  const int v = structure.node_count();
  const bool complete = train.complete();

  MixtureNetwork mix = structure;
  FitReport report;

  const auto proj = build_projections(mix);
  std::vector<std::vector<CondTable>> prior_sub(static_cast<std::size_t>(v));
  std::vector<std::vector<double>> alpha(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) {
    const CondTable prior_full = priors.family_prior_for(structure.base, i);
    alpha[i] = priors.weight_prior_for(structure, i);
    prior_sub[i].reserve(mix.nodes[i].size());
    for (int m = 0; m < mix.submodel_count(i); ++m)
      prior_sub[i].push_back(marginalize_counts(prior_full, proj[i][m]));
    const double w = 1.0 / static_cast<double>(mix.nodes[i].size());
    for (Submodel& sub : mix.nodes[i]) sub.weight = w;
  }

  // Complete data make the expected counts parameter-free, so they are
  // tabulated once; otherwise a uniform network bootstraps the first E step.
  FamilyCountTable counts =
      complete ? tabulate_family_counts(structure.base, train)
               : expected_family_counts(uniform_cpts(structure.base), train);

  const auto update_thetas = [&]() {
    for (int i = 0; i < v; ++i)
      for (int m = 0; m < mix.submodel_count(i); ++m)
        mix.nodes[i][m].cpt = theta_update(marginalize_counts(counts[i], proj[i][m]),
                                           prior_sub[i][m], &report.diagnostics);
  };
  update_thetas();

  DiscreteNetwork collapsed = collapse(mix);
  const auto record = [&](int iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.train_score = observed_data_score(collapsed, train);
    rec.weight_entropy = weight_entropies(mix);
    report.iterations.push_back(std::move(rec));
    if (config.on_iteration) config.on_iteration(iteration, mix, collapsed);
  };
  record(0);

  int iterations_run = 0;
  for (int t = 1; t <= config.max_iters; ++t) {
    iterations_run = t;
    if (!complete) {
      counts = expected_family_counts(collapsed, train);
      update_thetas();
    }
    const auto resp_sums =
        accumulate_resp_sums(mix, collapsed, train, proj, &report.diagnostics);
    for (int i = 0; i < v; ++i) {
      const auto psi = psi_update(resp_sums[i], alpha[i]);
      for (int m = 0; m < mix.submodel_count(i); ++m) mix.nodes[i][m].weight = psi[m];
    }

    collapsed = collapse(mix);
    record(t);

    const double prev = report.iterations[static_cast<std::size_t>(t) - 1].train_score;
    const double score = report.iterations[static_cast<std::size_t>(t)].train_score;
    if (prev - score > kScoreDecreaseWarning) {
      ++report.diagnostics.score_decreases;
      std::cerr << "em_fit: training score decreased by " << (prev - score)
                << " at iteration " << t << "\n";
    }
    const double rel = std::abs(score - prev) / std::max(std::abs(prev), 1e-12);
    if (rel < config.rel_tol) {
      report.converged = true;
      break;
    }
  }
  report.iteration_count = iterations_run;
  report.mixture = std::move(mix);
  report.collapsed = std::move(collapsed);
  return report;
}

double objective_value(const MixtureNetwork& eval, const MixtureNetwork& anchor,
                       const Dataset& data, const PriorSpec& priors) {
  eval.validate();
  anchor.validate();
  check_same_structure(eval, anchor);
  priors.validate();
  if (data.case_count() == 0)
    throw std::invalid_argument("objective_value: empty dataset");
  const Dataset aligned = align_dataset(data, anchor.base);
  validate_dataset(anchor.base, aligned, /*allow_missing=*/true);

  const auto proj = build_projections(anchor);
  const DiscreteNetwork collapsed = collapse(anchor);
  const FamilyCountTable counts = expected_family_counts(collapsed, aligned);
  const auto resp_sums = accumulate_resp_sums(anchor, collapsed, aligned, proj, nullptr);

  double f = 0.0;
  for (int i = 0; i < anchor.node_count(); ++i) {
    const CondTable prior_full = priors.family_prior_for(anchor.base, i);
    const auto alpha = priors.weight_prior_for(anchor, i);
    for (int m = 0; m < anchor.submodel_count(i); ++m) {
      const CondTable sub_counts = marginalize_counts(counts[i], proj[i][m]);
      const CondTable sub_priors = marginalize_counts(prior_full, proj[i][m]);
      const CondTable& theta = eval.nodes[i][m].cpt;
      for (std::size_t t = 0; t < sub_counts.values.size(); ++t) {
        const double coeff = sub_priors.values[t] + sub_counts.values[t];
        if (coeff > 0.0) f += coeff * std::log(theta.values[t]);
      }
      const double wcoeff = alpha[m] + resp_sums[i][m];
      if (wcoeff > 0.0) f += wcoeff * std::log(eval.nodes[i][m].weight);
    }
  }
  return f;
}

double objective_value(const MixtureNetwork& mix, const Dataset& data,
                       const PriorSpec& priors) {
  return objective_value(mix, mix, data, priors);
}

}  // namespace bmn
