#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "revinsight/embed.hpp"
#include "revinsight/ingest.hpp"
#include "revinsight/recommend.hpp"
#include "revinsight/simcluster.hpp"

namespace revinsight {

/// Every knob of the pipeline in one place. Serialized as a flat
/// "key = value" text file (see config_keys() for the full list); '#'
/// starts a comment line.
struct PipelineConfig {
  std::string input;
  ingest::ColumnMapping columns;
  bool lenient = false;
  std::set<int> exclude_ratings = ingest::kDefaultExcludedRatings;
  bool language_filter = true;
  std::string language = "en";
  double language_confidence = 0.5;
  std::size_t latest = 300;
  bool redact_pii = true;

  embed::EmbeddingBackendConfig embedding;
  cluster::ClusterParams cluster_params;

  std::string template_path;
  recommend::PromptBudget budget;
  recommend::ChatClientConfig chat;

  std::string output_dir = "out";
  std::uint64_t seed = 42;
  std::string created_at;  // ISO-8601; empty means "now" (or SOURCE_DATE_EPOCH)
};

/// Keys accepted in config files and, with '_' spelled '-', as CLI flags.
const std::vector<std::string_view>& config_keys();

/// Sets one key from its text form. Throws ConfigError for an unknown key or
/// an unparseable value.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines on top of `base`. Throws ConfigError with the
/// line number on syntax errors.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});

/// Throws IoError when the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Every key in config_keys() order; parse_config(to_text(c)) reproduces c.
std::string to_text(const PipelineConfig& config);

/// Cross-field checks (cluster params, budget, embedding config, confidence
/// range). Throws ConfigError.
void validate(const PipelineConfig& config);

}  // namespace revinsight
