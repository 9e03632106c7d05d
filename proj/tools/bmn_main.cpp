// Command-line harness for Bernoulli-mixture Bayesian networks: data
// generation, conventional and mixture fits, scoring, exhaustive structure
// sweeps, and the restricted global-mixture equivalence check.

#include <cstdint>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bmn/errors.hpp"
#include "bmn/estimation.hpp"
#include "bmn/experiments.hpp"
#include "bmn/io.hpp"
#include "bmn/mixture.hpp"
#include "bmn/rng.hpp"

namespace {

using namespace bmn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGuard = 2;

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, ',')) {
    try {
      out.push_back(std::stoi(field));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad integer '" + field + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

// A cap list is either one value for every node or one value per node.
std::vector<int> expand_caps(const std::string& text, int v) {
  std::vector<int> caps = parse_int_list(text, "--caps");
  if (caps.size() == 1) caps.assign(static_cast<std::size_t>(v), caps[0]);
  if (static_cast<int>(caps.size()) != v)
    throw std::invalid_argument("--caps: need 1 value or one per node");
  return caps;
}

std::vector<int> parse_ordering(const std::string& text, const DiscreteNetwork& net) {
  std::vector<int> ordering;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, '>')) {
    const int idx = net.index_of(field);
    if (idx < 0)
      throw std::invalid_argument("--ordering: unknown node '" + field + "'");
    ordering.push_back(idx);
  }
  if (static_cast<int>(ordering.size()) != net.node_count())
    throw std::invalid_argument("--ordering: need every node exactly once");
  return ordering;
}

DiscreteNetwork load_model_or_default(const std::string& path, std::uint64_t seed) {
  if (path.empty()) return default_true_model(seed);
  const nlohmann::json j = load_json(path);
  if (json_is_mixture(j)) return collapse(mixture_from_json(j));
  DiscreteNetwork net = network_from_json(j);
  if (!net.has_cpts()) net = random_cpts(net, derive_seed(seed, 0));
  return net;
}

int cmd_generate(const std::string& model_path, std::uint64_t seed, int n_train,
                 int n_test, const std::string& net_out, const std::string& train_out,
                 const std::string& test_out) {
  const DiscreteNetwork net = load_model_or_default(model_path, seed);
  save_network(net_out, net);
  save_dataset(train_out, sample(net, n_train, derive_seed(seed, 1)));
  save_dataset(test_out, sample(net, n_test, derive_seed(seed, 2)));
  std::cout << "wrote " << net_out << ", " << train_out << " (" << n_train
            << " cases), " << test_out << " (" << n_test << " cases)\n";
  return kExitOk;
}

int cmd_fit(const std::string& net_path, const std::string& data_path,
            const std::string& caps_text, const PriorSpec& priors,
            const EmConfig& config, const std::string& report_out,
            const std::string& collapsed_out, const std::string& mixture_out) {
  const nlohmann::json j = load_json(net_path);
  const DiscreteNetwork skel = json_is_mixture(j)
                                   ? mixture_from_json(j).base
                                   : network_from_json(j).skeleton();
  const Dataset data = load_dataset(data_path);

  MixtureNetwork structure =
      caps_text.empty() ? make_singleton_mixture(skel)
                        : make_mixture_skeleton(skel, expand_caps(caps_text,
                                                                  skel.node_count()));
  const FitReport fit = em_fit(structure, data, priors, config);

  if (!report_out.empty()) save_json(report_out, fit_report_to_json(fit));
  if (!collapsed_out.empty()) save_network(collapsed_out, fit.collapsed);
  if (!mixture_out.empty()) save_mixture(mixture_out, fit.mixture);
  std::cout << (fit.converged ? "converged" : "stopped") << " after "
            << fit.iteration_count << " iterations, train score "
            << fit.iterations.back().train_score << "\n";
  if (fit.diagnostics.score_decreases > 0)
    std::cerr << "warning: training score decreased "
              << fit.diagnostics.score_decreases << " time(s)\n";
  if (fit.diagnostics.zero_denominator_columns > 0 ||
      fit.diagnostics.responsibility_fallbacks > 0)
    std::cerr << "note: uniform fallbacks -- "
              << fit.diagnostics.zero_denominator_columns << " empty CPT column(s), "
              << fit.diagnostics.responsibility_fallbacks
              << " zero responsibility vector(s)\n";
  return kExitOk;
}

int cmd_score(const std::string& net_path, const std::string& data_path) {
  const nlohmann::json j = load_json(net_path);
  const DiscreteNetwork net =
      json_is_mixture(j) ? collapse(mixture_from_json(j)) : network_from_json(j);
  const Dataset data = align_dataset(load_dataset(data_path), net);
  std::cout << dataset_score(net, data) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& model_path, std::uint64_t seed, int n_train,
              int n_test, const PriorSpec& priors, const std::string& csv_out,
              const std::string& summary_out) {
  const DiscreteNetwork truth = load_model_or_default(model_path, seed);
  const auto records = run_sweep(truth, n_train, n_test, seed, priors);
  write_text_file(csv_out, sweep_to_csv(truth, records));
  nlohmann::json summary = sweep_summary_json(truth, records);
  summary["seed"] = seed;
  summary["n_train"] = n_train;
  summary["n_test"] = n_test;
  if (!summary_out.empty()) save_json(summary_out, summary);
  std::cout << records.size() << " models swept; wrote " << csv_out << "\n";
  return kExitOk;
}

int cmd_bmn_exp(const std::string& model_path, std::uint64_t seed, int n_train,
                int n_test, const std::string& ordering_text,
                const std::string& caps_text, const PriorSpec& priors,
                const EmConfig& config, const std::string& report_out) {
  const DiscreteNetwork truth = load_model_or_default(model_path, seed);
  std::vector<int> ordering(static_cast<std::size_t>(truth.node_count()));
  std::iota(ordering.begin(), ordering.end(), 0);
  if (!ordering_text.empty()) ordering = parse_ordering(ordering_text, truth);

  std::vector<int> caps(static_cast<std::size_t>(truth.node_count()));
  std::iota(caps.begin(), caps.end(), 0);  // uncapped: position maxima
  if (!caps_text.empty()) caps = expand_caps(caps_text, truth.node_count());

  const FitReport fit =
      run_bmn_experiment(truth, ordering, caps, n_train, n_test, seed, priors, config);
  if (!report_out.empty()) save_json(report_out, fit_report_to_json(fit));
  std::cout << (fit.converged ? "converged" : "stopped") << " after "
            << fit.iteration_count << " iterations, final train "
            << fit.iterations.back().train_score << ", final test "
            << *fit.iterations.back().test_score << "\n";
  return kExitOk;
}

int cmd_verify_mbn(int nodes, const std::string& cards_text, std::uint64_t seed,
                   int cases, const std::string& report_out) {
  std::vector<int> cards(static_cast<std::size_t>(nodes), 2);
  if (!cards_text.empty()) {
    cards = parse_int_list(cards_text, "--cards");
    if (static_cast<int>(cards.size()) != nodes)
      throw std::invalid_argument("--cards: need one cardinality per node");
  }
  const auto report = verify_mbn_equivalence(nodes, cards, seed, cases);
  if (!report_out.empty()) save_json(report_out, mbn_report_to_json(report));
  std::cout << report.structure_count << " global structures from "
            << report.local_component_count << " local components; max |dev| = "
            << report.max_abs_deviation << " over " << report.case_count
            << " cases\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli-mixture Bayesian network toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int n_train = 100, n_test = 2000;
  std::string model_path, net_path, data_path;
  std::string caps_text, cards_text, ordering_text;
  std::string report_out, collapsed_out, mixture_out, csv_out = "sweep.csv",
              summary_out;
  std::string net_out = "true_model.json", train_out = "train.csv",
              test_out = "test.csv";
  int mbn_nodes = 4, mbn_cases = 1000;
  PriorSpec priors;
  EmConfig config;

  const auto add_seed = [&seed](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  };
  const auto add_priors = [&priors](CLI::App* cmd) {
    cmd->add_option("--prior-count", priors.family_pseudocount,
                    "Pseudocount per family-table cell")
        ->capture_default_str();
    cmd->add_option("--alpha", priors.weight_pseudocount,
                    "Pseudocount per mixture weight")
        ->capture_default_str();
  };
  const auto add_em = [&config](CLI::App* cmd) {
    cmd->add_option("--max-iters", config.max_iters, "Iteration budget")
        ->capture_default_str();
    cmd->add_option("--rel-tol", config.rel_tol,
                    "Relative train-score change that stops the fit")
        ->capture_default_str();
  };

  CLI::App* generate =
      app.add_subcommand("generate", "Write a model and sampled train/test data");
  add_seed(generate);
  generate->add_option("--model", model_path,
                       "Model JSON (default: built-in 4-node benchmark; "
                       "skeletons get seeded random CPTs)");
  generate->add_option("--train", n_train, "Training cases")->capture_default_str();
  generate->add_option("--test", n_test, "Test cases")->capture_default_str();
  generate->add_option("--net-out", net_out, "Model output path")->capture_default_str();
  generate->add_option("--train-out", train_out, "Training CSV path")
      ->capture_default_str();
  generate->add_option("--test-out", test_out, "Test CSV path")->capture_default_str();

  CLI::App* fit = app.add_subcommand(
      "fit", "Fit CPDs by MAP-EM (conventional, or a mixture when --caps is given)");
  add_seed(fit);
  fit->add_option("--net", net_path, "Structure source (network or mixture JSON)")
      ->required();
  fit->add_option("--data", data_path, "Training CSV")->required();
  fit->add_option("--caps", caps_text,
                  "Per-node parent caps (single value or comma list); omit for a "
                  "conventional fit");
  add_priors(fit);
  add_em(fit);
  fit->add_option("--report-out", report_out, "Fit report JSON path");
  fit->add_option("--collapsed-out", collapsed_out, "Collapsed network JSON path");
  fit->add_option("--mixture-out", mixture_out, "Fitted mixture JSON path");

  CLI::App* score = app.add_subcommand("score", "Normalized score of a model on data");
  add_seed(score);
  score->add_option("--net", net_path, "Network or mixture JSON")->required();
  score->add_option("--data", data_path, "Complete-data CSV")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep", "Score every ordering x structure by MAP fit");
  add_seed(sweep);
  sweep->add_option("--model", model_path, "True model (default: built-in benchmark)");
  sweep->add_option("--train-n", n_train, "Training cases")->capture_default_str();
  sweep->add_option("--test-n", n_test, "Test cases")->capture_default_str();
  add_priors(sweep);
  sweep->add_option("--csv-out", csv_out, "Record CSV path")->capture_default_str();
  sweep->add_option("--summary-out", summary_out, "Summary JSON path");

  CLI::App* bmn_exp = app.add_subcommand(
      "bmn-exp", "Fit a parent-capped mixture on the full structure and track "
                 "per-iteration test scores");
  add_seed(bmn_exp);
  bmn_exp->add_option("--model", model_path, "True model (default: built-in benchmark)");
  bmn_exp->add_option("--train-n", n_train, "Training cases")->capture_default_str();
  bmn_exp->add_option("--test-n", n_test, "Test cases")->capture_default_str();
  bmn_exp->add_option("--ordering", ordering_text,
                      "Node ordering as Name>Name>... (default: model order)");
  bmn_exp->add_option("--caps", caps_text,
                      "Per-node parent caps (default: uncapped)");
  add_priors(bmn_exp);
  add_em(bmn_exp);
  bmn_exp->add_option("--report-out", report_out, "Fit report JSON path");

  CLI::App* verify = app.add_subcommand(
      "verify-mbn", "Check the local-mixture likelihood against the equivalent "
                    "mixture of global structures");
  add_seed(verify);
  verify->add_option("--nodes", mbn_nodes, "Node count (max 4)")->capture_default_str();
  verify->add_option("--cards", cards_text, "Cardinalities (default: all 2)");
  verify->add_option("--cases", mbn_cases, "Sampled cases")->capture_default_str();
  verify->add_option("--report-out", report_out, "Report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed())
      return cmd_generate(model_path, seed, n_train, n_test, net_out, train_out,
                          test_out);
    if (fit->parsed())
      return cmd_fit(net_path, data_path, caps_text, priors, config, report_out,
                     collapsed_out, mixture_out);
    if (score->parsed()) return cmd_score(net_path, data_path);
    if (sweep->parsed())
      return cmd_sweep(model_path, seed, n_train, n_test, priors, csv_out,
                       summary_out);
    if (bmn_exp->parsed())
      return cmd_bmn_exp(model_path, seed, n_train, n_test, ordering_text, caps_text,
                         priors, config, report_out);
    if (verify->parsed())
      return cmd_verify_mbn(mbn_nodes, cards_text, seed, mbn_cases, report_out);
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
