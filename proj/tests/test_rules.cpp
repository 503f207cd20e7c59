#include "doctest.h"
#include "omt/enumerate.hpp"
#include "omt/rules.hpp"
#include "oracles.hpp"

using namespace omt;

namespace {

BinnedDataset labeled_dataset(const std::vector<int>& cards, std::vector<int32_t> labels,
                              int n_classes, uint64_t seed) {
  BinnedDataset d = oracle::synthetic_categorical(cards, static_cast<int>(labels.size()),
                                                  n_classes, seed);
  d.labels = std::move(labels);
  return d;
}

BinnedDataset regression_dataset(std::vector<double> y, uint64_t seed) {
  BinnedDataset d =
      oracle::synthetic_categorical({2}, static_cast<int>(y.size()), 2, seed);
  d.is_classification = false;
  d.encoding.is_classification = false;
  d.n_classes = 0;
  d.labels.clear();
  d.y = std::move(y);
  return d;
}

}  // namespace

TEST_CASE("root rule covers everything; majority loss") {
  BinnedDataset data = labeled_dataset({2}, {0, 0, 0, 1}, 2, 1);
  RuleConfig cfg;
  cfg.max_rule_length = 1;
  Rule root = root_rule(data, cfg);
  CHECK(root.cover_size() == 4);
  CHECK(root.length == 0);
  CHECK(root.loss == doctest::Approx(1.0));
  CHECK(root.predicted == 0);
}

TEST_CASE("root rule for regression: squared loss equals scatter around the mean") {
  BinnedDataset data = regression_dataset({1, 2, 3}, 2);
  RuleConfig cfg;
  cfg.metric = MetricKind::squared_error;
  cfg.max_rule_length = 1;
  Rule root = root_rule(data, cfg);
  CHECK(root.loss == doctest::Approx(2.0));
  CHECK(root.predicted_value == doctest::Approx(2.0));
}

TEST_CASE("metric/label mismatches raise config errors") {
  BinnedDataset cls = labeled_dataset({2}, {0, 1}, 2, 3);
  RuleConfig cfg;
  cfg.metric = MetricKind::squared_error;
  cfg.max_rule_length = 1;
  CHECK_THROWS_AS(root_rule(cls, cfg), ConfigError);

  BinnedDataset reg = regression_dataset({1, 2}, 4);
  RuleConfig cfg2;
  cfg2.metric = MetricKind::misclassification;
  cfg2.max_rule_length = 1;
  CHECK_THROWS_AS(root_rule(reg, cfg2), ConfigError);
}

TEST_CASE("extend filters the cover by the node condition") {
  BinnedDataset data = labeled_dataset({2}, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 2, 5);
  // Codes chosen by hand: samples 2 and 9 carry value 1.
  data.codes[0] = {0, 0, 1, 0, 0, 0, 0, 0, 0, 1};
  FeatureGraph g = build_graph(data, natural_order(1));
  RuleConfig cfg;
  cfg.max_rule_length = 1;
  cfg.min_support = 1;
  Rule root = root_rule(data, cfg);

  const GraphNode& value1 = g.node(2);  // f0 = 1
  auto extended = extend(root, value1, data, g, cfg);
  REQUIRE(extended);
  CHECK(*extended->cover == std::vector<int32_t>{2, 9});
  CHECK(extended->length == 1);

  cfg.min_support = 3;
  CHECK(!extend(root, value1, data, g, cfg));
}

TEST_CASE("extend with SKIP leaves cover and statistics untouched") {
  BinnedDataset data = oracle::synthetic_categorical({3, 2}, 30, 2, 6);
  FeatureGraph g = build_graph(data, natural_order(2));
  RuleConfig cfg;
  cfg.max_rule_length = 2;
  Rule root = root_rule(data, cfg);
  const Layer& l0 = g.layers()[0];
  const GraphNode& skip = g.node(l0.first_node + l0.count - 1);
  REQUIRE(skip.is_skip);
  auto same = extend(root, skip, data, g, cfg);
  REQUIRE(same);
  CHECK(same->cover.get() == root.cover.get());
  CHECK(same->loss == root.loss);
  CHECK(same->length == root.length);
}

TEST_CASE("misclassification loss after extension: A7/B3 gives 3") {
  BinnedDataset data = labeled_dataset({1}, {0, 0, 0, 0, 0, 0, 0, 1, 1, 1}, 2, 7);
  RuleConfig cfg;
  cfg.max_rule_length = 1;
  Rule root = root_rule(data, cfg);
  CHECK(root.loss == doctest::Approx(3.0));
  CHECK(root.predicted == 0);
}

TEST_CASE("path metric counts against the positive class") {
  SUBCASE("predicted positive") {
    BinnedDataset data = labeled_dataset(
        {1}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, 2, 8);
    RuleConfig cfg;
    cfg.max_rule_length = 1;
    cfg.positive_class = 1;
    Rule root = root_rule(data, cfg);
    CHECK(root.predicted == 1);
    CHECK(root.tp == 10);
    CHECK(root.fp == 2);
    CHECK(root.fn == 0);
  }
  SUBCASE("predicted negative") {
    BinnedDataset data = labeled_dataset({1}, {1, 1, 1, 0, 0, 0, 0, 0}, 2, 9);
    RuleConfig cfg;
    cfg.max_rule_length = 1;
    cfg.positive_class = 1;
    Rule root = root_rule(data, cfg);
    CHECK(root.predicted == 0);
    CHECK(root.tp == 0);
    CHECK(root.fp == 0);
    CHECK(root.fn == 3);
  }
}

TEST_CASE("absolute-error metric uses the median predictor") {
  BinnedDataset data = regression_dataset({2, 4}, 10);
  RuleConfig cfg;
  cfg.metric = MetricKind::absolute_error;
  cfg.max_rule_length = 1;
  Rule root = root_rule(data, cfg);
  CHECK(root.predicted_value == doctest::Approx(3.0));
  CHECK(root.loss == doctest::Approx(2.0));

  // Oracle: minimize sum |y - c| by scanning candidate centers.
  BinnedDataset odd = regression_dataset({1, 5, 6, 7, 20}, 11);
  Rule r2 = root_rule(odd, cfg);
  double best = kInf;
  for (double c = 0; c <= 21; c += 0.125) {
    double s = 0;
    for (double v : odd.y) s += std::abs(v - c);
    best = std::min(best, s);
  }
  CHECK(r2.loss == doctest::Approx(best));
}

TEST_CASE("fairness rates per group, absent group yields zero") {
  // Group feature is feature 0 with 2 groups; positive class 1.
  BinnedDataset data = labeled_dataset({2, 2}, {1, 0, 1, 0, 0, 1}, 2, 12);
  data.codes[0] = {0, 0, 0, 0, 1, 1};  // groups M=0 (4 samples), F=1 (2 samples)
  data.labels = {1, 1, 0, 0, 1, 1};    // M: 2 of 4 positive; F: 2 of 2
  data.group_column = 0;
  RuleConfig cfg;
  cfg.max_rule_length = 2;
  cfg.positive_class = 1;
  Rule root = root_rule(data, cfg);
  auto phi = fairness_stats(root, 2, 2, 1);
  CHECK(phi[0] == doctest::Approx(0.5));
  CHECK(phi[1] == doctest::Approx(1.0));
  CHECK(fairness_gap(root, 2, 2, 1) == doctest::Approx(0.5));

  cfg.per_path_fairness_delta = 0.3;
  CHECK(!passes_path_fairness(root, data, cfg));
  cfg.per_path_fairness_delta = 0.6;
  CHECK(passes_path_fairness(root, data, cfg));

  // Absent group: filter to group 0 only.
  FeatureGraph g = build_graph(data, natural_order(2));
  auto only_m = extend(root, g.node(1), data, g, cfg);  // f0 = 0
  REQUIRE(only_m);
  auto phi2 = fairness_stats(*only_m, 2, 2, 1);
  CHECK(phi2[1] == doctest::Approx(0.0));
}

TEST_CASE("more than 8 groups is rejected") {
  BinnedDataset data = oracle::synthetic_categorical({9, 2}, 30, 2, 13);
  data.group_column = 0;
  RuleConfig cfg;
  cfg.max_rule_length = 1;
  CHECK_THROWS_AS(root_rule(data, cfg), ConfigError);
}

TEST_CASE("extension is monotone and covers recheck exactly") {
  BinnedDataset data = oracle::synthetic_categorical({3, 2, 2}, 60, 3, 14);
  FeatureGraph g = build_graph(data, natural_order(3));
  RuleConfig cfg;
  cfg.max_rule_length = 3;
  cfg.min_support = 1;
  auto rules = enumerate_paths(g, data, cfg, 10000);
  for (const Rule& r : rules) {
    CHECK(r.loss >= 0.0);
    CHECK(r.loss <= r.cover_size());
    CHECK(std::is_sorted(r.cover->begin(), r.cover->end()));
    int count_sum = 0;
    for (int32_t c : r.class_counts) count_sum += c;
    CHECK(count_sum == r.cover_size());
    // tp + fn equals the positive count when a positive class is set.
  }
}

TEST_CASE("tp identities hold for every enumerated rule") {
  BinnedDataset data = oracle::synthetic_categorical({2, 3}, 40, 2, 15);
  FeatureGraph g = build_graph(data, natural_order(2));
  RuleConfig cfg;
  cfg.max_rule_length = 2;
  cfg.min_support = 1;
  cfg.positive_class = 1;
  for (const Rule& r : enumerate_paths(g, data, cfg, 1000)) {
    CHECK(r.tp + r.fn == r.class_counts[1]);
    if (r.predicted == 1) CHECK(r.tp + r.fp == r.cover_size());
  }
}
