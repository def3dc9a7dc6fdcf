#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "revinsight/review.hpp"

namespace revinsight::ingest {

/// Names the CSV header columns that feed each Review field. Only the text
/// column is required; unmapped fields stay absent.
struct ColumnMapping {
  std::string text = "text";
  std::optional<std::string> id;
  std::optional<std::string> rating;
  std::optional<std::string> timestamp;
  std::optional<std::string> source;
};

struct LoadOptions {
  ColumnMapping columns;
  bool lenient = false;  // skip malformed rows instead of failing
};

/// Reads a UTF-8 CSV file (header row required) into a corpus, one review per
/// data row in file order. When no id column is mapped, ids are the 0-based
/// data-row ordinals as strings.
///
/// Throws IoError for an unreadable file or, unless lenient, a malformed row
/// (the message carries the line number). Throws ConfigError when a mapped
/// column is missing from the header.
ReviewCorpus load_reviews(const std::filesystem::path& path,
                          const LoadOptions& options = {});

/// Same as load_reviews but over an in-memory buffer; `origin` names the
/// source in provenance and error messages.
ReviewCorpus parse_reviews(std::string_view csv_data, const LoadOptions& options,
                           std::string_view origin = "<memory>");

inline const std::set<int> kDefaultExcludedRatings{4, 5};

/// Keeps reviews whose rating is absent or not in `excluded`.
ReviewCorpus filter_by_rating(const ReviewCorpus& corpus,
                              const std::set<int>& excluded = kDefaultExcludedRatings);

struct Detection {
  std::string language;  // ISO 639-1, or "und" when undetermined
  double confidence = 0.0;
};

using LanguageDetector = std::function<Detection(std::string_view)>;

/// Stopword-frequency profile detector for en, es, fr, de, it, pt and nl.
/// Confidence is the winning language's share of all stopword hits; text with
/// no stopword hits is "und" with confidence 0.
class StopwordDetector {
 public:
  Detection operator()(std::string_view text) const;
};

ReviewCorpus filter_language(const ReviewCorpus& corpus,
                             std::string_view keep_language = "en",
                             const LanguageDetector& detector = StopwordDetector{},
                             double confidence_floor = 0.5);

/// Newest-first top n when any review is timestamped; untimestamped reviews
/// rank after all timestamped ones and ties keep file order. Without
/// timestamps this is the first n in corpus order.
ReviewCorpus select_latest(const ReviewCorpus& corpus, std::size_t n);

/// Replaces email addresses with "[EMAIL]" and phone-like digit runs (7+
/// digits, optional separators) with "[PHONE]". Idempotent.
std::string redact_pii(std::string_view text);

ReviewCorpus redact_pii(const ReviewCorpus& corpus);

/// Strips the words "implement", "review", "structure", "train" (whole word,
/// any case) and all numeric tokens, then collapses whitespace. Used when
/// exporting fine-tuning pairs.
std::string clean_training_text(std::string_view text);

}  // namespace revinsight::ingest
