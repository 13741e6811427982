#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treerules/stats.hpp"

namespace treerules {

/// Ordered numeric features plus the binary target column and the mapping of
/// its raw labels onto class indices {0, 1}.
struct FeatureSchema {
  std::vector<std::string> features;
  std::string target_name;
  std::map<std::string, int> target_mapping;

  /// Throws ConfigError unless names are unique and non-empty and the mapping
  /// is a bijection from exactly two labels onto {0, 1}.
  void validate() const;

  /// Raw label mapped to `class_index`.
  const std::string& label_for(int class_index) const;

  bool operator==(const FeatureSchema&) const = default;
};

enum class MissingPolicy { kDropRow, kImputeMedian };
enum class ParseErrorPolicy { kAbort, kDropRow };

struct LoadOptions {
  MissingPolicy missing = MissingPolicy::kDropRow;
  ParseErrorPolicy parse_errors = ParseErrorPolicy::kAbort;
};

/// Counts of what load_csv did to the raw rows.
struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t dropped_unmapped_label = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_parse_error = 0;
  std::size_t imputed_cells = 0;
};

/// Schema and load options read from a key-value config file.
struct DataConfig {
  FeatureSchema schema;
  LoadOptions options;
};

/// Row-major matrix of finite feature values with a binary target per row.
/// Immutable once constructed.
class Dataset {
 public:
  Dataset() = default;

  /// Throws DataError if the shapes disagree, a value is non-finite, or a
  /// target is outside {0, 1}.
  Dataset(FeatureSchema schema, std::vector<double> values, std::vector<std::uint8_t> targets);

  const FeatureSchema& schema() const noexcept { return schema_; }
  std::size_t n_samples() const noexcept { return targets_.size(); }
  std::size_t n_features() const noexcept { return schema_.features.size(); }
  bool empty() const noexcept { return targets_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_features(), n_features()};
  }
  double value(std::size_t i, std::size_t feature) const {
    return values_[i * n_features() + feature];
  }
  int target(std::size_t i) const noexcept { return targets_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> targets() const noexcept { return targets_; }

  /// Rows at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<double> values_;
  std::vector<std::uint8_t> targets_;
};

/// Parses the key-value schema config. Format, one entry per line:
///
///   # comment
///   feature = loan_amnt          (repeated; order defines column order)
///   target = loan_status
///   positive_label = Fully Paid  (raw label mapped to class 1)
///   negative_label = Charged Off (raw label mapped to class 0)
///   missing = drop-row | impute-median
///   parse_errors = abort | drop-row
DataConfig parse_data_config(std::string_view text);
DataConfig load_data_config(const std::filesystem::path& path);

/// Loads an RFC-4180 CSV with a header row. Rows whose label is not in the
/// target mapping are dropped. Empty cells, NA/NaN markers and non-finite
/// numbers count as missing and are handled per `options.missing`.
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const LoadOptions& options = {}, LoadReport* report = nullptr);
Dataset parse_csv(std::string_view text, const FeatureSchema& schema,
                  const LoadOptions& options = {}, LoadReport* report = nullptr);

/// Writes the features and the raw target label; values use shortest
/// round-trip decimals so reloading reproduces the matrix bit for bit.
std::string to_csv(const Dataset& data);
void save_csv(const Dataset& data, const std::filesystem::path& path);

/// Uniformly shuffled train/test partition. The train part holds
/// floor(train_fraction * n) rows; both parts keep the original row order.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Index-level form of split(): (train indices, test indices), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n_samples, double train_fraction, std::uint64_t seed);

struct FeatureSummary {
  std::size_t feature_index = 0;
  std::string feature_name;
  int class_index = 0;
  Describe stats;
};

/// One record per (feature, class), features in schema order, class 0 first.
std::vector<FeatureSummary> summarize(const Dataset& data);
std::string summary_to_csv(const std::vector<FeatureSummary>& summary, const FeatureSchema& schema);

}  // namespace treerules
