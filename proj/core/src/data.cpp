#include "treerules/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "treerules/csv.hpp"
#include "treerules/error.hpp"
#include "treerules/file_io.hpp"
#include "treerules/number_format.hpp"
#include "treerules/random.hpp"

namespace treerules {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_missing_marker(std::string_view cell) {
  if (cell.empty()) return true;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "na" || lower == "n/a" || lower == "nan" || lower == "null";
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return std::midpoint(values[n / 2 - 1], values[n / 2]);
}

}  // namespace

void FeatureSchema::validate() const {
  if (features.empty()) {
    throw ConfigError("schema declares no features");
  }
  std::set<std::string_view> seen;
  for (const auto& name : features) {
    if (name.empty()) throw ConfigError("feature names must be non-empty");
    if (!seen.insert(name).second) throw ConfigError("duplicate feature name '" + name + "'");
  }
  if (target_name.empty()) throw ConfigError("schema declares no target column");
  if (seen.contains(target_name)) {
    throw ConfigError("target column '" + target_name + "' is also listed as a feature");
  }
  if (target_mapping.size() != 2) {
    throw ConfigError("target mapping must cover exactly two labels");
  }
  bool has_zero = false;
  bool has_one = false;
  for (const auto& [label, cls] : target_mapping) {
    has_zero |= cls == 0;
    has_one |= cls == 1;
  }
  if (!has_zero || !has_one) {
    throw ConfigError("target mapping must map one label to 0 and one label to 1");
  }
}

const std::string& FeatureSchema::label_for(int class_index) const {
  for (const auto& [label, cls] : target_mapping) {
    if (cls == class_index) return label;
  }
  throw ConfigError("no label mapped to class " + std::to_string(class_index));
}

Dataset::Dataset(FeatureSchema schema, std::vector<double> values, std::vector<std::uint8_t> targets)
    : schema_(std::move(schema)), values_(std::move(values)), targets_(std::move(targets)) {
  if (values_.size() != targets_.size() * n_features()) {
    throw DataError("feature matrix has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(targets_.size()) + " rows x " + std::to_string(n_features()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("dataset contains a non-finite value");
  }
  for (auto t : targets_) {
    if (t > 1) throw DataError("targets must be 0 or 1");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> values;
  values.reserve(indices.size() * n_features());
  std::vector<std::uint8_t> targets;
  targets.reserve(indices.size());
  for (auto i : indices) {
    const auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    targets.push_back(targets_[i]);
  }
  return Dataset(schema_, std::move(values), std::move(targets));
}

DataConfig parse_data_config(std::string_view text) {
  DataConfig config;
  std::optional<std::string> positive;
  std::optional<std::string> negative;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));

    if (key == "feature") {
      config.schema.features.push_back(value);
    } else if (key == "target") {
      config.schema.target_name = value;
    } else if (key == "positive_label") {
      positive = value;
    } else if (key == "negative_label") {
      negative = value;
    } else if (key == "missing") {
      if (value == "drop-row") {
        config.options.missing = MissingPolicy::kDropRow;
      } else if (value == "impute-median") {
        config.options.missing = MissingPolicy::kImputeMedian;
      } else {
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown missing policy '" +
                          value + "'");
      }
    } else if (key == "parse_errors") {
      if (value == "abort") {
        config.options.parse_errors = ParseErrorPolicy::kAbort;
      } else if (value == "drop-row") {
        config.options.parse_errors = ParseErrorPolicy::kDropRow;
      } else {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown parse_errors policy '" + value + "'");
      }
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  if (!positive || !negative) {
    throw ConfigError("config must set both positive_label and negative_label");
  }
  if (*positive == *negative) {
    throw ConfigError("positive_label and negative_label must differ");
  }
  config.schema.target_mapping = {{*negative, 0}, {*positive, 1}};
  config.schema.validate();
  return config;
}

DataConfig load_data_config(const std::filesystem::path& path) {
  return parse_data_config(read_file(path));
}

Dataset parse_csv(std::string_view text, const FeatureSchema& schema, const LoadOptions& options,
                  LoadReport* report) {
  schema.validate();
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = {};

  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw DataError("empty dataset");

  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 0; c < header->size(); ++c) {
      if (trim((*header)[c]) == name) return c;
    }
    throw SchemaError("missing column '" + name + "'");
  };
  std::vector<std::size_t> feature_columns;
  for (const auto& name : schema.features) feature_columns.push_back(column_of(name));
  const std::size_t target_column = column_of(schema.target_name);

  const std::size_t n_features = schema.features.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;
  std::vector<std::uint8_t> targets;
  std::vector<double> row(n_features);

  while (auto record = reader.next()) {
    if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
    ++rep.rows_read;
    const std::size_t line = reader.line();

    if (record->size() != header->size()) {
      if (options.parse_errors == ParseErrorPolicy::kAbort) {
        throw ParseError("expected " + std::to_string(header->size()) + " fields, found " +
                             std::to_string(record->size()),
                         line);
      }
      ++rep.dropped_parse_error;
      continue;
    }

    const auto label = schema.target_mapping.find(std::string(trim((*record)[target_column])));
    if (label == schema.target_mapping.end()) {
      ++rep.dropped_unmapped_label;
      continue;
    }

    bool missing = false;
    bool bad = false;
    for (std::size_t j = 0; j < n_features; ++j) {
      const auto cell = trim((*record)[feature_columns[j]]);
      if (is_missing_marker(cell)) {
        row[j] = nan;
        missing = true;
        continue;
      }
      double v = 0.0;
      if (!try_parse_double(cell, v)) {
        if (options.parse_errors == ParseErrorPolicy::kAbort) {
          throw ParseError("column '" + schema.features[j] + "': not a number: '" +
                               std::string(cell) + "'",
                           line);
        }
        bad = true;
        break;
      }
      if (!std::isfinite(v)) {
        v = nan;
        missing = true;
      }
      row[j] = v;
    }
    if (bad) {
      ++rep.dropped_parse_error;
      continue;
    }
    if (missing && options.missing == MissingPolicy::kDropRow) {
      ++rep.dropped_missing;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    targets.push_back(static_cast<std::uint8_t>(label->second));
  }

  if (targets.empty()) throw DataError("empty dataset");

  if (options.missing == MissingPolicy::kImputeMedian) {
    const std::size_t n = targets.size();
    for (std::size_t j = 0; j < n_features; ++j) {
      std::vector<double> present;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i * n_features + j];
        if (!std::isnan(v)) present.push_back(v);
      }
      if (present.size() == n) continue;
      if (present.empty()) {
        throw DataError("column '" + schema.features[j] + "' has no values to impute from");
      }
      const double median = median_of(std::move(present));
      for (std::size_t i = 0; i < n; ++i) {
        double& v = values[i * n_features + j];
        if (std::isnan(v)) {
          v = median;
          ++rep.imputed_cells;
        }
      }
    }
  }

  return Dataset(schema, std::move(values), std::move(targets));
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const LoadOptions& options, LoadReport* report) {
  return parse_csv(read_file(path), schema, options, report);
}

std::string to_csv(const Dataset& data) {
  const auto& schema = data.schema();
  csv::Record header(schema.features);
  header.push_back(schema.target_name);
  std::string out = csv::join(header) + "\n";
  const std::string labels[2] = {csv::escape(schema.label_for(0)), csv::escape(schema.label_for(1))};
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    for (double v : data.row(i)) {
      out += format_shortest(v);
      out.push_back(',');
    }
    out += labels[data.target(i)];
    out.push_back('\n');
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  write_file_atomically(path, to_csv(data));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n_samples, double train_fraction, std::uint64_t seed) {
  if (n_samples < 2) throw DataError("split needs at least 2 samples");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n_samples)));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  auto [train, test] = split_indices(data.n_samples(), train_fraction, seed);
  return {data.subset(train), data.subset(test)};
}

std::vector<FeatureSummary> summarize(const Dataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  std::vector<FeatureSummary> out;
  std::vector<double> column;
  for (std::size_t j = 0; j < data.n_features(); ++j) {
    for (int cls = 0; cls < 2; ++cls) {
      column.clear();
      for (std::size_t i = 0; i < data.n_samples(); ++i) {
        if (data.target(i) == cls) column.push_back(data.value(i, j));
      }
      out.push_back({j, data.schema().features[j], cls, describe(column)});
    }
  }
  return out;
}

std::string summary_to_csv(const std::vector<FeatureSummary>& summary, const FeatureSchema& schema) {
  std::string out = "feature,class,label,count,mean,std,min,25%,50%,75%,max\n";
  for (const auto& s : summary) {
    csv::Record rec{s.feature_name,
                    std::to_string(s.class_index),
                    schema.label_for(s.class_index),
                    std::to_string(s.stats.count),
                    format_shortest(s.stats.mean),
                    format_shortest(s.stats.std),
                    format_shortest(s.stats.min),
                    format_shortest(s.stats.q25),
                    format_shortest(s.stats.q50),
                    format_shortest(s.stats.q75),
                    format_shortest(s.stats.max)};
    out += csv::join(rec) + "\n";
  }
  return out;
}

}  // namespace treerules
