#include "omt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace omt {

using ordered_json = nlohmann::ordered_json;

int MultiwayTree::match(const std::vector<int32_t>& sample_codes) const {
  for (size_t r = 0; r < rules.size(); ++r) {
    bool ok = true;
    for (const TreeCondition& c : rules[r].conditions)
      if (!c.admits(sample_codes[c.feature])) {
        ok = false;
        break;
      }
    if (ok) return static_cast<int>(r);
  }
  return -1;
}

int32_t MultiwayTree::predict_class(const std::vector<int32_t>& sample_codes) const {
  int r = match(sample_codes);
  return r < 0 ? fallback_label : rules[r].label;
}

double MultiwayTree::predict_value(const std::vector<int32_t>& sample_codes) const {
  int r = match(sample_codes);
  return r < 0 ? fallback_value : rules[r].value;
}

MultiwayTree assemble_tree(const MipSolution& mip, const MasterProblem& mp,
                           const BinnedDataset& dataset, const FeatureGraph& graph,
                           const CgConfig& config) {
  MultiwayTree tree;
  tree.feature_order = graph.feature_order();
  tree.depth = config.max_rule_length;
  tree.leaf_budget = config.leaf_budget;
  tree.metric = config.metric;
  tree.positive_class = config.positive_class;
  tree.encoding = dataset.encoding;

  for (int32_t j : mip.selected) {
    const Rule& rule = mp.pool[j];
    TreeRule tr;
    tr.pool_index = j;
    tr.cover_size = rule.cover_size();
    tr.label = rule.predicted;
    tr.value = rule.predicted_value;
    for (int32_t id : rule.node_ids) {
      const GraphNode& n = graph.node(id);
      tr.conditions.push_back({n.feature, n.lo_code, n.hi_code});
    }
    tree.rules.push_back(std::move(tr));
  }
  std::stable_sort(tree.rules.begin(), tree.rules.end(), [](const TreeRule& a, const TreeRule& b) {
    if (a.conditions.size() != b.conditions.size())
      return a.conditions.size() > b.conditions.size();
    return a.pool_index < b.pool_index;
  });

  if (dataset.is_classification) {
    std::vector<int> counts(dataset.n_classes, 0);
    for (int32_t c : dataset.labels) ++counts[c];
    tree.fallback_label = static_cast<int32_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
  } else {
    if (config.metric == MetricKind::squared_error) {
      double s = 0.0;
      for (double v : dataset.y) s += v;
      tree.fallback_value = dataset.n_samples ? s / dataset.n_samples : 0.0;
    } else {
      std::vector<double> ys = dataset.y;
      std::sort(ys.begin(), ys.end());
      const size_t n = ys.size();
      tree.fallback_value = n == 0 ? 0.0 : (n % 2 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]));
    }
  }
  return tree;
}

EvalReport evaluate(const MultiwayTree& tree, const BinnedDataset& dataset) {
  EvalReport report;
  report.n_rules = static_cast<int>(tree.rules.size());
  double total_len = 0.0;
  for (const TreeRule& r : tree.rules) total_len += static_cast<double>(r.conditions.size());
  report.mean_rule_length = report.n_rules ? total_len / report.n_rules : 0.0;

  std::vector<int32_t> sample(dataset.n_features);
  int correct = 0, matched = 0;

  if (dataset.is_classification) {
    const int n_classes = std::max(dataset.n_classes, static_cast<int>(tree.encoding.class_names.size()));
    report.confusion.assign(n_classes, std::vector<int>(n_classes, 0));
    for (int i = 0; i < dataset.n_samples; ++i) {
      for (int f = 0; f < dataset.n_features; ++f) sample[f] = dataset.codes[f][i];
      int r = tree.match(sample);
      if (r >= 0) ++matched;
      int32_t pred = r < 0 ? tree.fallback_label : tree.rules[r].label;
      int32_t truth = dataset.labels[i];
      ++report.confusion[truth][pred];
      if (pred == truth) ++correct;
    }
    report.accuracy = dataset.n_samples ? static_cast<double>(correct) / dataset.n_samples : 0.0;

    if (n_classes == 2) {
      int pos = tree.positive_class >= 0 ? tree.positive_class : 1;
      int tp = report.confusion[pos][pos];
      int fp = report.confusion[1 - pos][pos];
      int fn = report.confusion[pos][1 - pos];
      double denom = tp + 0.5 * (fp + fn);
      report.f1 = denom > 0.0 ? tp / denom : 0.0;
    }
  } else {
    // Accuracy reported as negative mean loss has no standard reading;
    // keep accuracy 0 and rely on the caller printing per-metric values.
    for (int i = 0; i < dataset.n_samples; ++i) {
      for (int f = 0; f < dataset.n_features; ++f) sample[f] = dataset.codes[f][i];
      if (tree.match(sample) >= 0) ++matched;
    }
  }
  report.coverage = dataset.n_samples ? static_cast<double>(matched) / dataset.n_samples : 0.0;
  return report;
}

namespace {

std::string metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::misclassification: return "misclass";
    case MetricKind::squared_error: return "squared";
    case MetricKind::absolute_error: return "absolute";
  }
  return "misclass";
}

MetricKind metric_from(const std::string& s) {
  if (s == "misclass") return MetricKind::misclassification;
  if (s == "squared") return MetricKind::squared_error;
  if (s == "absolute") return MetricKind::absolute_error;
  throw ParseError("unknown metric '" + s + "' in model file");
}

}  // namespace

std::string MultiwayTree::to_json() const {
  ordered_json doc;
  doc["schema"] = "omt-tree/1";
  doc["metric"] = metric_name(metric);
  doc["depth"] = depth;
  doc["leaves"] = leaf_budget;
  doc["positive_class"] =
      positive_class >= 0 && positive_class < static_cast<int>(encoding.class_names.size())
          ? ordered_json(encoding.class_names[positive_class])
          : ordered_json(nullptr);
  doc["feature_order"] = feature_order;

  ordered_json enc;
  enc["label"] = encoding.label_name;
  enc["classification"] = encoding.is_classification;
  enc["classes"] = encoding.class_names;
  ordered_json feats = ordered_json::array();
  for (size_t f = 0; f < encoding.features.size(); ++f) {
    const FeatureEncoder& fe = encoding.features[f];
    ordered_json jf;
    jf["name"] = encoding.feature_names[f];
    if (fe.kind == ColumnKind::categorical) {
      jf["kind"] = "categorical";
      jf["categories"] = fe.categories;
    } else {
      jf["kind"] = fe.kind == ColumnKind::ordinal ? "ordinal" : "numerical";
      jf["thresholds"] = fe.bins.thresholds;
      jf["binning"] = fe.bins.kind == BinKind::cumulative ? "cumulative" : "plain";
      jf["range"] = {fe.bins.intervals.empty() ? 0.0 : fe.bins.intervals.front().lo,
                     fe.bins.intervals.empty() ? 0.0
                                               : fe.bins.intervals[fe.bins.n_base() - 1].hi};
    }
    feats.push_back(std::move(jf));
  }
  enc["features"] = std::move(feats);
  doc["encoding"] = std::move(enc);

  if (encoding.is_classification)
    doc["fallback"] = encoding.class_names[fallback_label];
  else
    doc["fallback"] = fallback_value;

  ordered_json rules_j = ordered_json::array();
  for (const TreeRule& r : rules) {
    ordered_json jr;
    ordered_json conds = ordered_json::array();
    for (const TreeCondition& c : r.conditions) {
      ordered_json jc;
      jc["feature"] = encoding.feature_names[c.feature];
      jc["lo"] = c.lo_code;
      jc["hi"] = c.hi_code;
      const FeatureEncoder& fe = encoding.features[c.feature];
      if (fe.kind == ColumnKind::categorical) {
        ordered_json values = ordered_json::array();
        for (int32_t v = c.lo_code; v <= c.hi_code; ++v) values.push_back(fe.categories[v]);
        jc["values"] = std::move(values);
      }
      conds.push_back(std::move(jc));
    }
    jr["conditions"] = std::move(conds);
    if (encoding.is_classification)
      jr["label"] = encoding.class_names[r.label];
    else
      jr["value"] = r.value;
    jr["pool_index"] = r.pool_index;
    jr["cover"] = r.cover_size;
    rules_j.push_back(std::move(jr));
  }
  doc["rules"] = std::move(rules_j);
  return doc.dump(2) + "\n";
}

MultiwayTree MultiwayTree::from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (doc.value("schema", "") != "omt-tree/1")
    throw ParseError("model file schema is not omt-tree/1");

  MultiwayTree tree;
  tree.metric = metric_from(doc.at("metric").get<std::string>());
  tree.depth = doc.at("depth").get<int>();
  tree.leaf_budget = doc.at("leaves").get<int>();
  tree.feature_order = doc.at("feature_order").get<std::vector<int>>();

  const auto& enc = doc.at("encoding");
  tree.encoding.label_name = enc.at("label").get<std::string>();
  tree.encoding.is_classification = enc.at("classification").get<bool>();
  tree.encoding.class_names = enc.at("classes").get<std::vector<std::string>>();
  for (const auto& jf : enc.at("features")) {
    FeatureEncoder fe;
    tree.encoding.feature_names.push_back(jf.at("name").get<std::string>());
    std::string kind = jf.at("kind").get<std::string>();
    if (kind == "categorical") {
      fe.kind = ColumnKind::categorical;
      fe.categories = jf.at("categories").get<std::vector<std::string>>();
      fe.cardinality = static_cast<int>(fe.categories.size());
    } else {
      fe.kind = kind == "ordinal" ? ColumnKind::ordinal : ColumnKind::numerical;
      fe.bins.feature_index = static_cast<int>(tree.encoding.features.size());
      fe.bins.thresholds = jf.at("thresholds").get<std::vector<double>>();
      auto range = jf.at("range").get<std::vector<double>>();
      const int nb = fe.bins.n_base();
      for (int b = 0; b < nb; ++b) {
        Interval iv;
        iv.lo = b == 0 ? range[0] : fe.bins.thresholds[b - 1];
        iv.hi = b == nb - 1 ? range[1] : fe.bins.thresholds[b];
        iv.first_base = iv.last_base = b;
        fe.bins.intervals.push_back(iv);
      }
      if (jf.at("binning").get<std::string>() == "cumulative" && nb >= 2)
        fe.bins = apply_cumulative_binning(fe.bins);
      fe.cardinality = nb;
    }
    tree.encoding.features.push_back(std::move(fe));
  }

  auto class_id = [&](const std::string& name) {
    auto it = std::find(tree.encoding.class_names.begin(), tree.encoding.class_names.end(), name);
    if (it == tree.encoding.class_names.end())
      throw ParseError("model references unknown class '" + name + "'");
    return static_cast<int32_t>(it - tree.encoding.class_names.begin());
  };

  if (!doc.at("positive_class").is_null())
    tree.positive_class = class_id(doc.at("positive_class").get<std::string>());
  if (tree.encoding.is_classification)
    tree.fallback_label = class_id(doc.at("fallback").get<std::string>());
  else
    tree.fallback_value = doc.at("fallback").get<double>();

  auto feature_id = [&](const std::string& name) {
    auto it =
        std::find(tree.encoding.feature_names.begin(), tree.encoding.feature_names.end(), name);
    if (it == tree.encoding.feature_names.end())
      throw ParseError("model references unknown feature '" + name + "'");
    return static_cast<int>(it - tree.encoding.feature_names.begin());
  };

  for (const auto& jr : doc.at("rules")) {
    TreeRule tr;
    for (const auto& jc : jr.at("conditions")) {
      TreeCondition c;
      c.feature = feature_id(jc.at("feature").get<std::string>());
      c.lo_code = jc.at("lo").get<int32_t>();
      c.hi_code = jc.at("hi").get<int32_t>();
      tr.conditions.push_back(c);
    }
    if (tree.encoding.is_classification)
      tr.label = class_id(jr.at("label").get<std::string>());
    else
      tr.value = jr.at("value").get<double>();
    tr.pool_index = jr.value("pool_index", -1);
    tr.cover_size = jr.value("cover", 0);
    tree.rules.push_back(std::move(tr));
  }
  return tree;
}

std::string MultiwayTree::to_dot() const {
  std::ostringstream os;
  os << "digraph omt {\n  node [shape=box];\n";

  auto condition_text = [&](const TreeCondition& c) {
    const FeatureEncoder& fe = encoding.features[c.feature];
    const std::string& name = encoding.feature_names[c.feature];
    if (fe.kind == ColumnKind::categorical) {
      std::string vals;
      for (int32_t v = c.lo_code; v <= c.hi_code; ++v) {
        if (!vals.empty()) vals += "|";
        vals += fe.categories[v];
      }
      return name + " = " + vals;
    }
    return name + " in bins " + std::to_string(c.lo_code) + ".." + std::to_string(c.hi_code);
  };

  // Trie over condition sequences; rules sharing a prefix share inner nodes.
  std::map<std::vector<std::string>, int> ids;
  int next_id = 1;
  os << "  n0 [label=\"root\"];\n";
  for (size_t r = 0; r < rules.size(); ++r) {
    std::vector<std::string> prefix;
    int parent = 0;
    for (const TreeCondition& c : rules[r].conditions) {
      std::string text = condition_text(c);
      prefix.push_back(text);
      auto [it, inserted] = ids.emplace(prefix, next_id);
      if (inserted) {
        os << "  n" << next_id << " [label=\"" << text << "\"];\n";
        os << "  n" << parent << " -> n" << next_id << ";\n";
        ++next_id;
      }
      parent = it->second;
    }
    std::string leaf_label = encoding.is_classification
                                 ? encoding.class_names[rules[r].label]
                                 : std::to_string(rules[r].value);
    os << "  leaf" << r << " [label=\"" << leaf_label << "\", shape=ellipse];\n";
    os << "  n" << parent << " -> leaf" << r
       << (rules[r].conditions.empty() ? " [label=\"any\"]" : "") << ";\n";
  }
  os << "  fallback [label=\""
     << (encoding.is_classification ? encoding.class_names[fallback_label]
                                    : std::to_string(fallback_value))
     << "\", shape=ellipse, style=dashed];\n";
  os << "  n0 -> fallback [label=\"any\", style=dashed];\n";
  os << "}\n";
  return os.str();
}

namespace {

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int c : counts) {
    double p = static_cast<double>(c) / total;
    g -= p * p;
  }
  return g;
}

struct GreedySplitter {
  const BinnedDataset& data;
  int max_depth;
  int min_support;
  std::vector<TreeRule> leaves;

  void build(std::vector<int32_t>& samples, std::vector<TreeCondition>& path,
             std::vector<bool>& used, int depth) {
    std::vector<int> counts(data.n_classes, 0);
    for (int32_t i : samples) ++counts[data.labels[i]];
    const int total = static_cast<int>(samples.size());
    const int32_t majority =
        static_cast<int32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const double node_gini = gini(counts, total);

    auto leafify = [&] {
      TreeRule leaf;
      leaf.conditions = path;
      leaf.label = majority;
      leaf.cover_size = total;
      leaves.push_back(std::move(leaf));
    };

    if (depth >= max_depth || node_gini <= 1e-12 || total < 2 * min_support) {
      leafify();
      return;
    }

    int best_f = -1;
    double best_score = node_gini - 1e-9;
    for (int f = 0; f < data.n_features; ++f) {
      if (used[f]) continue;
      const int card = data.cardinalities[f];
      std::vector<std::vector<int>> child_counts(card, std::vector<int>(data.n_classes, 0));
      std::vector<int> child_tot(card, 0);
      for (int32_t i : samples) {
        ++child_counts[data.codes[f][i]][data.labels[i]];
        ++child_tot[data.codes[f][i]];
      }
      int nonempty = 0;
      double score = 0.0;
      for (int v = 0; v < card; ++v) {
        if (child_tot[v] > 0) ++nonempty;
        score += static_cast<double>(child_tot[v]) / total * gini(child_counts[v], child_tot[v]);
      }
      if (nonempty < 2) continue;
      if (score < best_score - 1e-12) {
        best_score = score;
        best_f = f;
      }
    }
    if (best_f < 0) {
      leafify();
      return;
    }

    const int card = data.cardinalities[best_f];
    std::vector<std::vector<int32_t>> buckets(card);
    for (int32_t i : samples) buckets[data.codes[best_f][i]].push_back(i);
    used[best_f] = true;
    for (int32_t v = 0; v < card; ++v) {
      if (buckets[v].empty()) continue;
      path.push_back({best_f, v, v});
      build(buckets[v], path, used, depth + 1);
      path.pop_back();
    }
    used[best_f] = false;
  }
};

}  // namespace

MultiwayTree greedy_baseline(const BinnedDataset& dataset, int depth, int min_support) {
  if (!dataset.is_classification)
    throw ConfigError("the greedy baseline supports classification only");
  MultiwayTree tree;
  tree.encoding = dataset.encoding;
  tree.depth = depth;
  tree.metric = MetricKind::misclassification;
  tree.feature_order = natural_order(dataset.n_features);

  std::vector<int> counts(dataset.n_classes, 0);
  for (int32_t c : dataset.labels) ++counts[c];
  tree.fallback_label =
      static_cast<int32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());

  const double g0 = gini(counts, dataset.n_samples);
  if (g0 > 1e-12) {
    GreedySplitter splitter{dataset, depth, std::max(1, min_support), {}};
    std::vector<int32_t> all(dataset.n_samples);
    for (int i = 0; i < dataset.n_samples; ++i) all[i] = i;
    std::vector<TreeCondition> path;
    std::vector<bool> used(dataset.n_features, false);
    splitter.build(all, path, used, 0);
    // A single all-wildcard leaf is just the fallback.
    if (splitter.leaves.size() > 1 || !splitter.leaves.front().conditions.empty())
      tree.rules = std::move(splitter.leaves);
  }
  tree.leaf_budget = static_cast<int>(tree.rules.size());

  std::stable_sort(tree.rules.begin(), tree.rules.end(), [](const TreeRule& a, const TreeRule& b) {
    return a.conditions.size() > b.conditions.size();
  });
  return tree;
}

}  // namespace omt
