#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treerules/model.hpp"

namespace treerules {

inline constexpr int kInterchangeFormatVersion = 1;

/// A model together with the feature names stored alongside it.
struct ModelDocument {
  Model model;
  std::vector<std::string> feature_names;
};

/// Flattened-array JSON document (see docs/interchange.md). Leaf payloads are
/// class counts; leaves carry -1 in both child arrays.
std::string export_json_string(const Model& model, std::span<const std::string> feature_names = {});
void export_json(const Model& model, const std::filesystem::path& path,
                 std::span<const std::string> feature_names = {});

/// Parses and validates a document, rebuilding arena models with leaf
/// probabilities derived from the counts. Throws ValidationError naming the
/// tree index and node id on structural violations, ParseError on malformed
/// JSON or an unknown format_version.
ModelDocument import_json_string(std::string_view text);
ModelDocument import_json(const std::filesystem::path& path);

}  // namespace treerules
