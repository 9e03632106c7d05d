#include "bmn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bmn {

using nlohmann::json;

namespace {

std::string fmt_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_csv_name(const std::string& name) {
  if (name.empty() || name == "?" ||
      name.find_first_of(",\r\n") != std::string::npos)
    throw std::invalid_argument("dataset: node name '" + name +
                                "' cannot be written to CSV");
}

json cpt_to_json(const CondTable& cpt) {
  json rows = json::array();
  for (int k = 0; k < cpt.configs; ++k) {
    json row = json::array();
    for (int j = 0; j < cpt.states; ++j) row.push_back(cpt.at(j, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

CondTable cpt_from_json(const json& rows, int states, int configs,
                        const std::string& where) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != configs)
    throw std::invalid_argument(where + ": expected " + std::to_string(configs) +
                                " CPT rows");
  CondTable cpt(states, configs);
  for (int k = 0; k < configs; ++k) {
    const json& row = rows[k];
    if (!row.is_array() || static_cast<int>(row.size()) != states)
      throw std::invalid_argument(where + ": CPT row " + std::to_string(k) +
                                  " needs " + std::to_string(states) + " entries");
    for (int j = 0; j < states; ++j) cpt.at(j, k) = row[j].get<double>();
  }
  return cpt;
}

std::vector<int> parents_from_json(const json& names, const DiscreteNetwork& partial,
                                   int node_index, const std::string& where) {
  std::vector<int> parents;
  for (const auto& jn : names) {
    const std::string pname = jn.get<std::string>();
    const int p = partial.index_of(pname);
    if (p < 0 || p >= node_index)
      throw std::invalid_argument(where + ": parent '" + pname +
                                  "' must name an earlier node");
    parents.push_back(p);
  }
  return parents;
}

json record_to_json(const DiscreteNetwork& reference, const SweepRecord& rec) {
  std::string ordering;
  for (std::size_t p = 0; p < rec.ordering.size(); ++p) {
    if (p) ordering += '>';
    ordering += reference.nodes[rec.ordering[p]].name;
  }
  json tags = json::array();
  if (rec.tag_empty) tags.push_back("empty");
  if (rec.tag_true) tags.push_back("true");
  if (rec.tag_full) tags.push_back("full");
  return json{{"ordering", ordering},
              {"bitmask", rec.structure_mask},
              {"train_score", score_to_json(rec.train_score)},
              {"test_score", score_to_json(rec.test_score)},
              {"tags", tags}};
}

double mean_or_neg_inf(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

json score_to_json(double score) {
  if (std::isfinite(score)) return score;
  if (std::isnan(score)) return "nan";
  return score > 0 ? "inf" : "-inf";
}

json network_to_json(const DiscreteNetwork& net) {
  if (net.has_cpts())
    net.validate();
  else
    net.validate_structure();
  json nodes = json::array();
  for (int i = 0; i < net.node_count(); ++i) {
    const NodeSpec& n = net.nodes[i];
    json parents = json::array();
    for (int p : n.parents) parents.push_back(net.nodes[p].name);
    json jn{{"name", n.name}, {"states", n.states}, {"parents", parents}};
    if (!n.cpt.empty()) jn["cpt"] = cpt_to_json(n.cpt);
    nodes.push_back(std::move(jn));
  }
  return json{{"nodes", nodes}};
}

DiscreteNetwork network_from_json(const json& j) {
  DiscreteNetwork net;
  try {
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty())
      throw std::invalid_argument("network: 'nodes' must be a non-empty array");
    int with_cpt = 0;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const json& jn = nodes[i];
      NodeSpec node;
      node.name = jn.at("name").get<std::string>();
      node.states = jn.at("states").get<int>();
      const std::string where = "network node '" + node.name + "'";
      node.parents = parents_from_json(jn.at("parents"), net, i, where);
      net.nodes.push_back(std::move(node));
      if (jn.contains("cpt") && !jn.at("cpt").is_null()) {
        NodeSpec& added = net.nodes.back();
        added.cpt = cpt_from_json(jn.at("cpt"), added.states, net.config_count(i), where);
        ++with_cpt;
      }
    }
    if (with_cpt != 0 && with_cpt != net.node_count())
      throw std::invalid_argument("network: either every node or no node may carry a CPT");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("network JSON: ") + e.what());
  }
  if (net.has_cpts())
    net.validate();
  else
    net.validate_structure();
  return net;
}

json mixture_to_json(const MixtureNetwork& mix) {
  mix.validate();
  json out = network_to_json(collapse(mix));
  for (int i = 0; i < mix.node_count(); ++i) {
    json subs = json::array();
    for (const Submodel& sub : mix.nodes[i]) {
      json parents = json::array();
      for (int p : sub.parents) parents.push_back(mix.base.nodes[p].name);
      subs.push_back(json{{"parents", parents},
                          {"weight", sub.weight},
                          {"cpt", cpt_to_json(sub.cpt)}});
    }
    out["nodes"][i]["submodels"] = std::move(subs);
  }
  return out;
}

MixtureNetwork mixture_from_json(const json& j) {
  MixtureNetwork mix;
  try {
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty())
      throw std::invalid_argument("mixture: 'nodes' must be a non-empty array");
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      const json& jn = nodes[i];
      NodeSpec node;
      node.name = jn.at("name").get<std::string>();
      node.states = jn.at("states").get<int>();
      node.parents = parents_from_json(jn.at("parents"), mix.base, i,
                                       "mixture node '" + node.name + "'");
      mix.base.nodes.push_back(std::move(node));
    }
    mix.nodes.resize(mix.base.nodes.size());
    for (int i = 0; i < mix.base.node_count(); ++i) {
      const json& jn = nodes[i];
      const std::string where = "mixture node '" + mix.base.nodes[i].name + "'";
      if (!jn.contains("submodels"))
        throw std::invalid_argument(where + ": missing 'submodels'");
      for (const json& js : jn.at("submodels")) {
        Submodel sub;
        for (const auto& pn : js.at("parents")) {
          const int p = mix.base.index_of(pn.get<std::string>());
          if (p < 0)
            throw std::invalid_argument(where + ": unknown submodel parent");
          sub.parents.push_back(p);
        }
        sub.weight = js.at("weight").get<double>();
        int r = 1;
        for (int p : sub.parents) r *= mix.base.nodes[p].states;
        sub.cpt = cpt_from_json(js.at("cpt"), mix.base.nodes[i].states, r, where);
        mix.nodes[i].push_back(std::move(sub));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("mixture JSON: ") + e.what());
  }
  mix.validate();
  return mix;
}

bool json_is_mixture(const json& j) {
  return j.contains("nodes") && j.at("nodes").is_array() && !j.at("nodes").empty() &&
         j.at("nodes")[0].contains("submodels");
}

std::string dataset_to_csv(const Dataset& data) {
  if (data.names.empty()) throw std::invalid_argument("dataset: no columns");
  std::string out;
  for (std::size_t c = 0; c < data.names.size(); ++c) {
    check_csv_name(data.names[c]);
    if (c) out += ',';
    out += data.names[c];
  }
  out += '\n';
  for (const auto& row : data.cases) {
    if (row.size() != data.names.size())
      throw std::invalid_argument("dataset: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (row[c] == kMissing)
        out += '?';
      else
        out += std::to_string(row[c]);
    }
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  Dataset data;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : s) {
      if (ch == ',') {
        fields.push_back(field);
        field.clear();
      } else if (ch != '\r') {
        field += ch;
      }
    }
    fields.push_back(field);
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (data.names.empty()) {
      data.names = fields;
      continue;
    }
    if (fields.size() != data.names.size())
      throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(data.names.size()) +
                                  " fields");
    std::vector<int> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) {
      if (f == "?") {
        row.push_back(kMissing);
        continue;
      }
      int value = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc{} || ptr != f.data() + f.size() || value < 0)
        throw std::invalid_argument("dataset CSV line " + std::to_string(line_no) +
                                    ": bad state value '" + f + "'");
      row.push_back(value);
    }
    data.cases.push_back(std::move(row));
  }
  if (data.names.empty())
    throw std::invalid_argument("dataset CSV: missing header row");
  return data;
}

json fit_report_to_json(const FitReport& report) {
  json iterations = json::array();
  for (const IterationRecord& rec : report.iterations) {
    json jr{{"iteration", rec.iteration},
            {"train_score", score_to_json(rec.train_score)},
            {"weight_entropy", rec.weight_entropy}};
    if (rec.test_score) jr["test_score"] = score_to_json(*rec.test_score);
    iterations.push_back(std::move(jr));
  }

  json top = json::array();
  for (int i = 0; i < report.mixture.node_count(); ++i) {
    std::vector<int> order(report.mixture.nodes[i].size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return report.mixture.nodes[i][a].weight > report.mixture.nodes[i][b].weight;
    });
    json subs = json::array();
    for (int m : order) {
      const Submodel& sub = report.mixture.nodes[i][m];
      json parents = json::array();
      for (int p : sub.parents) parents.push_back(report.mixture.base.nodes[p].name);
      subs.push_back(json{{"parents", parents}, {"weight", sub.weight}});
    }
    top.push_back(json{{"node", report.mixture.base.nodes[i].name},
                       {"submodels", subs}});
  }

  return json{{"converged", report.converged},
              {"iterations_run", report.iteration_count},
              {"diagnostics",
               {{"zero_denominator_columns", report.diagnostics.zero_denominator_columns},
                {"responsibility_fallbacks", report.diagnostics.responsibility_fallbacks},
                {"score_decreases", report.diagnostics.score_decreases}}},
              {"iterations", iterations},
              {"submodel_weights", top},
              {"mixture", mixture_to_json(report.mixture)},
              {"collapsed", network_to_json(report.collapsed)}};
}

std::string sweep_to_csv(const DiscreteNetwork& reference,
                         const std::vector<SweepRecord>& records) {
  std::string out = "ordering,bitmask,train_score,test_score,tags\n";
  for (const SweepRecord& rec : records) {
    std::string ordering;
    for (std::size_t p = 0; p < rec.ordering.size(); ++p) {
      if (p) ordering += '>';
      ordering += reference.nodes[rec.ordering[p]].name;
    }
    std::string tags;
    const auto add_tag = [&tags](const char* t) {
      if (!tags.empty()) tags += '|';
      tags += t;
    };
    if (rec.tag_empty) add_tag("empty");
    if (rec.tag_true) add_tag("true");
    if (rec.tag_full) add_tag("full");
    out += ordering + ',' + std::to_string(rec.structure_mask) + ',' +
           fmt_score(rec.train_score) + ',' + fmt_score(rec.test_score) + ',' + tags +
           '\n';
  }
  return out;
}

json sweep_summary_json(const DiscreteNetwork& reference,
                        const std::vector<SweepRecord>& records) {
  std::vector<double> full_train, full_test, empty_test;
  const SweepRecord* true_rec = nullptr;
  const SweepRecord* best_test = nullptr;
  for (const SweepRecord& rec : records) {
    if (rec.tag_full) {
      full_train.push_back(rec.train_score);
      full_test.push_back(rec.test_score);
    }
    if (rec.tag_empty) empty_test.push_back(rec.test_score);
    if (rec.tag_true) true_rec = &rec;
    if (!best_test || rec.test_score > best_test->test_score) best_test = &rec;
  }
  json out{{"node_count", reference.node_count()},
           {"model_count", records.size()},
           {"full_model_count", full_train.size()},
           {"empty_model_count", empty_test.size()},
           {"full_mean_train_score", score_to_json(mean_or_neg_inf(full_train))},
           {"full_mean_test_score", score_to_json(mean_or_neg_inf(full_test))},
           {"empty_mean_test_score", score_to_json(mean_or_neg_inf(empty_test))}};
  if (true_rec) out["true_model"] = record_to_json(reference, *true_rec);
  if (best_test) out["best_test_model"] = record_to_json(reference, *best_test);
  return out;
}

json mbn_report_to_json(const MbnEquivalenceReport& report) {
  return json{{"node_count", report.node_count},
              {"structure_count", report.structure_count},
              {"local_component_count", report.local_component_count},
              {"case_count", report.case_count},
              {"max_abs_deviation", report.max_abs_deviation}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

void save_json(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

DiscreteNetwork load_network(const std::string& path) {
  return network_from_json(load_json(path));
}

void save_network(const std::string& path, const DiscreteNetwork& net) {
  save_json(path, network_to_json(net));
}

MixtureNetwork load_mixture(const std::string& path) {
  return mixture_from_json(load_json(path));
}

void save_mixture(const std::string& path, const MixtureNetwork& mix) {
  save_json(path, mixture_to_json(mix));
}

Dataset load_dataset(const std::string& path) {
  return dataset_from_csv(read_text_file(path));
}

void save_dataset(const std::string& path, const Dataset& data) {
  write_text_file(path, dataset_to_csv(data));
}

}  // namespace bmn
