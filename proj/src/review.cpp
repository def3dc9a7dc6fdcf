#include "revinsight/review.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "revinsight/errors.hpp"
#include "revinsight/text.hpp"

namespace revinsight {

using nlohmann::json;

void validate(const Review& review) {
  if (text::trim(review.text).empty()) {
    throw InvalidArgument(fmt::format("review '{}' has empty text", review.id));
  }
  if (review.rating && (*review.rating < 1 || *review.rating > 5)) {
    throw InvalidArgument(fmt::format("review '{}' has rating {} outside 1..5",
                                      review.id, *review.rating));
  }
}

void validate(const ReviewCorpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : corpus.reviews) {
    validate(r);
    if (!seen.insert(r.id).second) {
      throw InvalidArgument(fmt::format("duplicate review id '{}'", r.id));
    }
  }
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view raw) {
  using namespace std::chrono;
  auto s = text::trim(raw);
  if (s.empty()) return std::nullopt;

  bool all_digits = true;
  for (char c : s) all_digits = all_digits && (c >= '0' && c <= '9');
  if (all_digits) {
    long long secs = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), secs);
    if (ec != std::errc{}) return std::nullopt;
    return Timestamp{seconds{secs}};
  }

  // YYYY-MM-DD
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
      !parse_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  int hh = 0, mm = 0, ss = 0;
  auto rest = s.substr(10);
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    rest.remove_prefix(1);
    if (!rest.empty() && (rest.back() == 'Z' || rest.back() == 'z')) {
      rest.remove_suffix(1);
    }
    if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
    if (rest[2] != ':' || !parse_int(rest.substr(0, 2), hh) ||
        !parse_int(rest.substr(3, 2), mm)) {
      return std::nullopt;
    }
    if (rest.size() == 8 && (rest[5] != ':' || !parse_int(rest.substr(6, 2), ss))) {
      return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  return Timestamp{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  hh_mm_ss hms{ts - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z",
                     static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

void write_jsonl(std::ostream& out, const ReviewCorpus& corpus) {
  for (const auto& r : corpus.reviews) {
    json j = json::object();
    j["id"] = r.id;
    j["text"] = r.text;
    if (r.rating) j["rating"] = *r.rating;
    if (r.timestamp) j["timestamp"] = format_timestamp(*r.timestamp);
    if (r.source) j["source"] = *r.source;
    out << j.dump() << '\n';
  }
}

ReviewCorpus read_jsonl(std::istream& in, std::string provenance) {
  ReviewCorpus corpus;
  corpus.provenance = std::move(provenance);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      Review r;
      r.id = j.at("id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      if (j.contains("rating")) r.rating = j["rating"].get<int>();
      if (j.contains("timestamp")) {
        r.timestamp = parse_timestamp(j["timestamp"].get<std::string>());
        if (!r.timestamp) throw IoError("bad timestamp");
      }
      if (j.contains("source")) r.source = j["source"].get<std::string>();
      corpus.reviews.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(fmt::format("corpus line {}: {}", line_no, e.what()));
    }
  }
  return corpus;
}

}  // namespace revinsight
