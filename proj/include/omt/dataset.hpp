#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omt/common.hpp"

namespace omt {

enum class ColumnKind { categorical, numerical, ordinal };

struct RawColumn {
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::string> text;    // raw field values, one per sample
  std::vector<double> numeric;      // parsed values; valid when kind != categorical
};

struct RawDataset {
  std::vector<std::string> column_names;
  std::vector<RawColumn> columns;   // includes the label column
  int label_column = -1;
  int n_samples = 0;

  int n_features() const { return static_cast<int>(columns.size()) - 1; }
  // Maps feature index (0..k-1, label excluded) to column index.
  int feature_to_column(int f) const { return f < label_column ? f : f + 1; }
};

// Loads a comma-separated file with a header row. Column kinds are inferred
// (numerical iff every field parses as a real number) unless overridden in
// schema_hints. Empty fields become the categorical level "<NA>"; an empty
// field in a numerical column is a parse error.
RawDataset load_csv(const std::string& path, const std::string& label_column,
                    const std::map<std::string, ColumnKind>& schema_hints = {});

// Empirical quantiles at j/n_bins (j = 1..n_bins-1), linear interpolation
// between order statistics. Duplicates and cuts that would create an empty
// edge interval are dropped, so the result may be shorter than n_bins-1.
std::vector<double> quantile_thresholds(std::vector<double> values, int n_bins);

enum class BinKind { plain, cumulative };

// Half-open [lo, hi) value range covering base intervals first..last.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  int first_base = 0;
  int last_base = 0;
};

struct BinSpec {
  int feature_index = -1;
  BinKind kind = BinKind::plain;
  std::vector<double> thresholds;   // strictly increasing, length n_base()-1
  std::vector<Interval> intervals;  // bases first, then contiguous unions

  int n_base() const { return static_cast<int>(thresholds.size()) + 1; }
  // Base interval index for a raw value (values past either end clamp).
  int base_code(double value) const;
  bool out_of_range(double value) const;
};

// Builds the plain spec for one numerical feature: quantile thresholds plus
// the base interval list spanning [min(values), max(values)].
BinSpec make_bin_spec(int feature_index, const std::vector<double>& values,
                      int n_bins, BinKind kind);

// Expands a plain base-interval list into all contiguous unions of base
// intervals except the full range: kappa*(kappa+1)/2 - 1 intervals in
// (length, start) order. Requires at least two base intervals.
BinSpec apply_cumulative_binning(const BinSpec& spec);

// Per-feature fitted encoder: category table or bin spec.
struct FeatureEncoder {
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::string> categories;  // code -> value, first-appearance order
  BinSpec bins;                         // valid when kind != categorical
  int cardinality = 0;                  // number of base codes
};

struct Encoding {
  std::vector<std::string> feature_names;
  std::vector<FeatureEncoder> features;
  std::string label_name;
  bool is_classification = true;
  std::vector<std::string> class_names;  // classification only
};

// Code assigned to categorical values never seen during fitting; matches no
// graph node except SKIP.
inline constexpr int32_t kUnseenCode = -1;

struct BinnedDataset {
  int n_samples = 0;
  int n_features = 0;
  std::vector<std::vector<int32_t>> codes;  // [feature][sample] base codes
  std::vector<int32_t> labels;              // class ids (classification)
  std::vector<double> y;                    // targets (regression)
  bool is_classification = true;
  int n_classes = 0;
  std::vector<int32_t> cardinalities;       // base codes per feature
  std::optional<int> group_column;          // sensitive feature for fairness
  Encoding encoding;
  int encode_warnings = 0;                  // clamped / unseen values

  const std::vector<std::string>& feature_names() const { return encoding.feature_names; }
  const std::vector<std::string>& class_names() const { return encoding.class_names; }
};

// Fits encoders on raw data and encodes it. Every numerical/ordinal feature
// must have a BinSpec in bin_specs (keyed by feature index). Sample codes
// always index base intervals; cumulative intervals only exist in the graph.
BinnedDataset encode(const RawDataset& raw, const std::vector<BinSpec>& bin_specs,
                     bool classification_labels = true);

// Encodes raw data with an already-fitted encoding (validation/test/predict).
// Unseen categorical values map to kUnseenCode, out-of-range numerical values
// clamp to the boundary bin; both bump encode_warnings. Rows with labels are
// encoded when the label column is present, else labels stay empty.
BinnedDataset encode_with(const Encoding& enc, const RawDataset& raw);

// Single-feature information gain of the label, used for `--order gain`.
double information_gain(const BinnedDataset& data, int feature);

}  // namespace omt
