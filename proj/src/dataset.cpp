#include "omt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace omt {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + t.size() && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

RawDataset load_csv(const std::string& path, const std::string& label_column,
                    const std::map<std::string, ColumnKind>& schema_hints) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file, header row required");
  RawDataset ds;
  ds.column_names = split_fields(line);
  const size_t n_cols = ds.column_names.size();
  if (n_cols == 0) throw ParseError(path + ": empty header row");
  ds.columns.resize(n_cols);

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != n_cols)
      throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                       std::to_string(n_cols) + " fields, got " + std::to_string(fields.size()));
    for (size_t c = 0; c < n_cols; ++c) ds.columns[c].text.push_back(std::move(fields[c]));
    ++ds.n_samples;
  }

  auto it = std::find(ds.column_names.begin(), ds.column_names.end(), label_column);
  if (it == ds.column_names.end())
    throw ConfigError("label column '" + label_column + "' not found in " + path);
  ds.label_column = static_cast<int>(it - ds.column_names.begin());

  for (size_t c = 0; c < n_cols; ++c) {
    RawColumn& col = ds.columns[c];
    auto hint = schema_hints.find(ds.column_names[c]);
    bool all_numeric = ds.n_samples > 0;
    col.numeric.resize(col.text.size());
    for (size_t i = 0; i < col.text.size() && all_numeric; ++i)
      all_numeric = parse_double(col.text[i], col.numeric[i]);

    if (hint != schema_hints.end()) {
      col.kind = hint->second;
      if (col.kind != ColumnKind::categorical && !all_numeric) {
        // Re-scan to name the offending row.
        for (size_t i = 0; i < col.text.size(); ++i) {
          double v;
          if (!parse_double(col.text[i], v))
            throw ParseError(path + ": row " + std::to_string(i + 2) + ": column '" +
                             ds.column_names[c] + "' hinted numerical but value '" +
                             col.text[i] + "' does not parse");
        }
      }
    } else {
      col.kind = all_numeric ? ColumnKind::numerical : ColumnKind::categorical;
    }
    if (col.kind == ColumnKind::categorical) col.numeric.clear();
  }
  return ds;
}

std::vector<double> quantile_thresholds(std::vector<double> values, int n_bins) {
  if (n_bins < 2) throw ConfigError("quantile_thresholds: n_bins must be >= 2");
  if (values.empty()) throw ConfigError("quantile_thresholds: empty value list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  const double lo = values.front(), hi = values.back();

  std::vector<double> cuts;
  for (int j = 1; j < n_bins; ++j) {
    // Type-7 quantile: linear interpolation between order statistics.
    double h = (static_cast<double>(n) - 1.0) * j / n_bins;
    size_t k = static_cast<size_t>(std::floor(h));
    double frac = h - static_cast<double>(k);
    double q = values[k];
    if (k + 1 < n) q += frac * (values[k + 1] - values[k]);
    if (q > lo && q <= hi) cuts.push_back(q);  // drop cuts yielding empty edge bins
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

int BinSpec::base_code(double value) const {
  auto it = std::upper_bound(thresholds.begin(), thresholds.end(), value);
  return static_cast<int>(it - thresholds.begin());
}

bool BinSpec::out_of_range(double value) const {
  if (intervals.empty()) return false;
  return value < intervals.front().lo || value > intervals[n_base() - 1].hi;
}

BinSpec make_bin_spec(int feature_index, const std::vector<double>& values,
                      int n_bins, BinKind kind) {
  BinSpec spec;
  spec.feature_index = feature_index;
  spec.kind = BinKind::plain;
  spec.thresholds = quantile_thresholds(values, n_bins);

  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  const int nb = spec.n_base();
  for (int b = 0; b < nb; ++b) {
    Interval iv;
    iv.lo = b == 0 ? lo : spec.thresholds[b - 1];
    iv.hi = b == nb - 1 ? hi : spec.thresholds[b];
    iv.first_base = iv.last_base = b;
    spec.intervals.push_back(iv);
  }
  if (kind == BinKind::cumulative && nb >= 2) return apply_cumulative_binning(spec);
  return spec;
}

BinSpec apply_cumulative_binning(const BinSpec& spec) {
  const int nb = spec.n_base();
  if (nb < 2)
    throw ConfigError("cumulative binning needs at least 2 base intervals, got " +
                      std::to_string(nb));
  BinSpec out = spec;
  out.kind = BinKind::cumulative;
  out.intervals.clear();
  // All contiguous unions except the full range, shortest first.
  for (int len = 1; len < nb; ++len) {
    for (int a = 0; a + len <= nb; ++a) {
      int b = a + len - 1;
      Interval iv;
      iv.lo = spec.intervals[a].lo;
      iv.hi = spec.intervals[b].hi;
      iv.first_base = a;
      iv.last_base = b;
      out.intervals.push_back(iv);
    }
  }
  return out;
}

namespace {

// Label handling shared by encode / encode_with.
void encode_labels(const RawColumn& col, bool classification, BinnedDataset& out) {
  if (classification) {
    std::unordered_map<std::string, int32_t> ids;
    for (const auto& name : out.encoding.class_names)
      ids.emplace(name, static_cast<int32_t>(ids.size()));
    for (const auto& v : col.text) {
      auto it = ids.find(v);
      if (it == ids.end()) {
        it = ids.emplace(v, static_cast<int32_t>(ids.size())).first;
        out.encoding.class_names.push_back(v);
      }
      out.labels.push_back(it->second);
    }
    out.n_classes = static_cast<int>(out.encoding.class_names.size());
  } else {
    out.y.reserve(col.text.size());
    for (size_t i = 0; i < col.text.size(); ++i) {
      double v;
      if (!parse_double(col.text[i], v))
        throw ParseError("row " + std::to_string(i + 2) + ": label '" + col.text[i] +
                         "' does not parse as a number (regression metric)");
      out.y.push_back(v);
    }
  }
}

}  // namespace

BinnedDataset encode(const RawDataset& raw, const std::vector<BinSpec>& bin_specs,
                     bool classification_labels) {
  BinnedDataset out;
  out.n_samples = raw.n_samples;
  out.n_features = raw.n_features();
  out.is_classification = classification_labels;
  out.encoding.is_classification = classification_labels;
  out.encoding.label_name = raw.column_names[raw.label_column];

  std::vector<const BinSpec*> spec_of(out.n_features, nullptr);
  for (const BinSpec& s : bin_specs) {
    if (s.feature_index < 0 || s.feature_index >= out.n_features)
      throw ConfigError("bin spec references feature index " + std::to_string(s.feature_index));
    spec_of[s.feature_index] = &s;
  }

  for (int f = 0; f < out.n_features; ++f) {
    const RawColumn& col = raw.columns[raw.feature_to_column(f)];
    out.encoding.feature_names.push_back(raw.column_names[raw.feature_to_column(f)]);
    FeatureEncoder enc;
    std::vector<int32_t> codes(raw.n_samples);

    if (col.kind == ColumnKind::categorical) {
      enc.kind = ColumnKind::categorical;
      std::unordered_map<std::string, int32_t> ids;
      for (int i = 0; i < raw.n_samples; ++i) {
        const std::string& v = col.text[i].empty() ? std::string("<NA>") : col.text[i];
        auto it = ids.find(v);
        if (it == ids.end()) {
          it = ids.emplace(v, static_cast<int32_t>(ids.size())).first;
          enc.categories.push_back(v);
        }
        codes[i] = it->second;
      }
      enc.cardinality = static_cast<int>(enc.categories.size());
    } else {
      if (!spec_of[f])
        throw ConfigError("numerical feature '" + out.encoding.feature_names.back() +
                          "' has no bin spec");
      enc.kind = col.kind;
      enc.bins = *spec_of[f];
      enc.cardinality = enc.bins.n_base();
      for (int i = 0; i < raw.n_samples; ++i)
        codes[i] = enc.bins.base_code(col.numeric[i]);
    }
    out.cardinalities.push_back(enc.cardinality);
    out.codes.push_back(std::move(codes));
    out.encoding.features.push_back(std::move(enc));
  }

  encode_labels(raw.columns[raw.label_column], classification_labels, out);
  return out;
}

BinnedDataset encode_with(const Encoding& enc, const RawDataset& raw) {
  if (raw.n_features() != static_cast<int>(enc.features.size()))
    throw ConfigError("dataset has " + std::to_string(raw.n_features()) +
                      " features, model expects " + std::to_string(enc.features.size()));
  BinnedDataset out;
  out.n_samples = raw.n_samples;
  out.n_features = raw.n_features();
  out.is_classification = enc.is_classification;
  out.encoding = enc;

  for (int f = 0; f < out.n_features; ++f) {
    int c = raw.feature_to_column(f);
    if (raw.column_names[c] != enc.feature_names[f])
      throw ConfigError("column " + std::to_string(c) + " is '" + raw.column_names[c] +
                        "', model expects '" + enc.feature_names[f] + "'");
    const RawColumn& col = raw.columns[c];
    const FeatureEncoder& fe = enc.features[f];
    std::vector<int32_t> codes(raw.n_samples);

    if (fe.kind == ColumnKind::categorical) {
      std::unordered_map<std::string, int32_t> ids;
      for (size_t k = 0; k < fe.categories.size(); ++k)
        ids.emplace(fe.categories[k], static_cast<int32_t>(k));
      for (int i = 0; i < raw.n_samples; ++i) {
        const std::string& v = col.text[i].empty() ? std::string("<NA>") : col.text[i];
        auto it = ids.find(v);
        if (it == ids.end()) {
          codes[i] = kUnseenCode;
          ++out.encode_warnings;
        } else {
          codes[i] = it->second;
        }
      }
    } else {
      for (int i = 0; i < raw.n_samples; ++i) {
        double v;
        if (col.kind == ColumnKind::categorical) {
          if (!parse_double(col.text[i], v))
            throw ParseError("row " + std::to_string(i + 2) + ": value '" + col.text[i] +
                             "' in numerical column '" + enc.feature_names[f] + "' does not parse");
        } else {
          v = col.numeric[i];
        }
        if (fe.bins.out_of_range(v)) ++out.encode_warnings;
        codes[i] = fe.bins.base_code(v);
      }
    }
    out.cardinalities.push_back(fe.cardinality);
    out.codes.push_back(std::move(codes));
  }

  out.encoding.class_names = enc.class_names;  // keep fitted class table fixed
  if (enc.is_classification) {
    // Unseen label values extend the table (evaluation still works; the model
    // simply never predicts them).
    std::unordered_map<std::string, int32_t> ids;
    for (size_t k = 0; k < enc.class_names.size(); ++k)
      ids.emplace(enc.class_names[k], static_cast<int32_t>(k));
    const RawColumn& col = raw.columns[raw.label_column];
    for (const auto& v : col.text) {
      auto it = ids.find(v);
      if (it == ids.end()) {
        it = ids.emplace(v, static_cast<int32_t>(ids.size())).first;
        out.encoding.class_names.push_back(v);
      }
      out.labels.push_back(it->second);
    }
    out.n_classes = static_cast<int>(out.encoding.class_names.size());
  } else {
    encode_labels(raw.columns[raw.label_column], false, out);
  }
  return out;
}

double information_gain(const BinnedDataset& data, int feature) {
  if (!data.is_classification || data.n_samples == 0) return 0.0;
  const double n = data.n_samples;
  auto entropy = [](const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (int c : counts) {
      if (c == 0) continue;
      double p = static_cast<double>(c) / total;
      h -= p * std::log2(p);
    }
    return h;
  };

  std::vector<int> base(data.n_classes, 0);
  for (int32_t c : data.labels) ++base[c];
  double h0 = entropy(base, data.n_samples);

  int card = data.cardinalities[feature];
  std::vector<std::vector<int>> per_value(card, std::vector<int>(data.n_classes, 0));
  std::vector<int> totals(card, 0);
  for (int i = 0; i < data.n_samples; ++i) {
    int32_t v = data.codes[feature][i];
    ++per_value[v][data.labels[i]];
    ++totals[v];
  }
  double h = 0.0;
  for (int v = 0; v < card; ++v) h += totals[v] / n * entropy(per_value[v], totals[v]);
  return h0 - h;
}

}  // namespace omt
