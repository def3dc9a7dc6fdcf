#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revinsight {

using Timestamp = std::chrono::sys_seconds;

/// One customer review record.
struct Review {
  std::string id;
  std::string text;
  std::optional<int> rating;  // 1..5 when present
  std::optional<Timestamp> timestamp;
  std::optional<std::string> source;

  friend bool operator==(const Review&, const Review&) = default;
};

/// Ordered, id-unique collection of reviews plus a human-readable trail of
/// where it came from and which filters touched it.
struct ReviewCorpus {
  std::vector<Review> reviews;
  std::string provenance;

  std::size_t size() const noexcept { return reviews.size(); }
  bool empty() const noexcept { return reviews.empty(); }

  friend bool operator==(const ReviewCorpus&, const ReviewCorpus&) = default;
};

/// Throws InvalidArgument when a review breaks the record invariants
/// (blank text, rating outside 1..5) or ids repeat.
void validate(const Review& review);
void validate(const ReviewCorpus& corpus);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS][Z]" (space separator also
/// allowed) and plain integer Unix seconds. Returns nullopt when unparseable.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Canonical "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);

/// One JSON object per line: {"id","text"[,"rating"][,"timestamp"][,"source"]}.
/// Absent optional fields are omitted rather than written as null.
void write_jsonl(std::ostream& out, const ReviewCorpus& corpus);
ReviewCorpus read_jsonl(std::istream& in, std::string provenance = {});

}  // namespace revinsight
