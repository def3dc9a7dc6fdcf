#include "revinsight/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "revinsight/csv.hpp"
#include "revinsight/errors.hpp"
#include "revinsight/text.hpp"

namespace revinsight::ingest {

namespace {

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::trim(header[i]) == name) return i;
  }
  return std::nullopt;
}

std::size_t require_column(const std::vector<std::string>& header,
                           const std::string& name, std::string_view origin) {
  auto idx = find_column(header, name);
  if (!idx) {
    throw ConfigError(
        fmt::format("{}: mapped column '{}' not found in header", origin, name));
  }
  return *idx;
}

struct ColumnIndex {
  std::size_t text;
  std::optional<std::size_t> id, rating, timestamp, source;
};

std::optional<int> parse_rating(std::string_view raw, std::string& error) {
  auto s = text::trim(raw);
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  // Tolerate "4.0" style exports.
  if (ec == std::errc{} && ptr != s.data() + s.size()) {
    auto tail = s.substr(static_cast<std::size_t>(ptr - s.data()));
    if (tail.find_first_not_of(".0") != std::string_view::npos || tail[0] != '.') {
      ec = std::errc::invalid_argument;
    }
  }
  if (ec != std::errc{} || value < 1 || value > 5) {
    error = fmt::format("rating '{}' is not an integer in 1..5", s);
    return std::nullopt;
  }
  return value;
}

}  // namespace

ReviewCorpus parse_reviews(std::string_view csv_data, const LoadOptions& options,
                           std::string_view origin) {
  csv::Reader reader(csv_data);
  auto header = reader.next();
  if (!header || !header->ok()) {
    throw IoError(fmt::format("{}: missing or malformed CSV header", origin));
  }

  const auto& cols = options.columns;
  ColumnIndex idx{require_column(header->fields, cols.text, origin), {}, {}, {}, {}};
  if (cols.id) idx.id = require_column(header->fields, *cols.id, origin);
  if (cols.rating) idx.rating = require_column(header->fields, *cols.rating, origin);
  if (cols.timestamp) {
    idx.timestamp = require_column(header->fields, *cols.timestamp, origin);
  }
  if (cols.source) idx.source = require_column(header->fields, *cols.source, origin);

  ReviewCorpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::size_t data_row = 0;
  std::size_t skipped = 0;

  while (auto rec = reader.next()) {
    std::size_t ordinal = data_row++;
    std::string error = rec->error;
    Review review;

    if (error.empty() && rec->fields.size() != header->fields.size()) {
      error = fmt::format("expected {} fields, found {}", header->fields.size(),
                          rec->fields.size());
    }
    if (error.empty()) {
      const auto& f = rec->fields;
      review.id = idx.id ? std::string(text::trim(f[*idx.id]))
                         : std::to_string(ordinal);
      review.text = f[idx.text];
      if (idx.rating) review.rating = parse_rating(f[*idx.rating], error);
      if (error.empty() && idx.timestamp && !text::trim(f[*idx.timestamp]).empty()) {
        review.timestamp = parse_timestamp(f[*idx.timestamp]);
        if (!review.timestamp) {
          error = fmt::format("unparseable timestamp '{}'", f[*idx.timestamp]);
        }
      }
      if (idx.source && !text::trim(f[*idx.source]).empty()) {
        review.source = std::string(text::trim(f[*idx.source]));
      }
      if (error.empty() && text::trim(review.text).empty()) error = "empty review text";
      if (error.empty() && review.id.empty()) error = "empty review id";
      if (error.empty() && seen_ids.count(review.id)) {
        error = fmt::format("duplicate review id '{}'", review.id);
      }
    }

    if (!error.empty()) {
      if (!options.lenient) {
        throw IoError(fmt::format("{}: line {}: {}", origin, rec->line, error));
      }
      ++skipped;
      continue;
    }
    seen_ids.insert(review.id);
    corpus.reviews.push_back(std::move(review));
  }

  corpus.provenance = fmt::format("loaded {} reviews from {}", corpus.size(), origin);
  if (skipped) corpus.provenance += fmt::format(" ({} malformed rows skipped)", skipped);
  return corpus;
}

ReviewCorpus load_reviews(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("cannot read '{}'", path.string()));
  return parse_reviews(buf.str(), options, path.string());
}

ReviewCorpus filter_by_rating(const ReviewCorpus& corpus, const std::set<int>& excluded) {
  for (int r : excluded) {
    if (r < 1 || r > 5) {
      throw InvalidArgument(fmt::format("excluded rating {} outside 1..5", r));
    }
  }
  ReviewCorpus out;
  for (const auto& r : corpus.reviews) {
    if (!r.rating || !excluded.count(*r.rating)) out.reviews.push_back(r);
  }
  std::string list;
  for (int r : excluded) list += (list.empty() ? "" : ",") + std::to_string(r);
  out.provenance = fmt::format("{}; rating filter excluding {{{}}}: {} -> {}",
                               corpus.provenance, list, corpus.size(), out.size());
  return out;
}

namespace {

struct Profile {
  std::string_view language;
  std::unordered_set<std::string_view> stopwords;
};

const std::vector<Profile>& profiles() {
  static const std::vector<Profile> kProfiles = {
      {"en", {"the", "and", "is", "was", "were", "to", "of", "it", "i", "my",
              "for", "that", "with", "they", "this", "not", "have", "had", "but",
              "you", "are", "be", "at", "me", "we", "very", "so", "on", "there",
              "been", "would", "their", "from", "an"}},
      {"es", {"el", "la", "los", "las", "y", "es", "fue", "muy", "pero", "que",
              "por", "para", "con", "una", "un", "del", "lo", "mi", "se", "su",
              "no", "al", "como", "más", "servicio", "estaba", "nos", "le"}},
      {"fr", {"le", "la", "les", "et", "est", "était", "très", "mais", "que",
              "pour", "avec", "une", "un", "des", "du", "je", "il", "elle", "nous",
              "vous", "pas", "ce", "cette", "sur", "au", "aux", "qui", "été"}},
      {"de", {"der", "die", "das", "und", "ist", "war", "sehr", "aber", "nicht",
              "mit", "für", "ein", "eine", "ich", "wir", "sie", "es", "auf", "zu",
              "den", "dem", "des", "auch", "wurde", "hat", "bei", "noch"}},
      {"it", {"il", "lo", "gli", "le", "e", "è", "era", "molto", "ma", "che",
              "per", "con", "una", "uno", "di", "della", "del", "non", "sono",
              "ho", "abbiamo", "questo", "anche", "nel", "alla"}},
      {"pt", {"o", "os", "as", "e", "é", "foi", "muito", "mas", "que", "para",
              "com", "uma", "um", "do", "da", "dos", "das", "não", "eu", "nós",
              "meu", "minha", "em", "no", "na", "atendimento"}},
      {"nl", {"de", "het", "een", "en", "is", "was", "zeer", "maar", "niet",
              "met", "voor", "ik", "wij", "we", "ze", "zijn", "op", "van", "dat",
              "die", "ook", "heel", "erg", "bij"}},
  };
  return kProfiles;
}

}  // namespace

Detection StopwordDetector::operator()(std::string_view input) const {
  const auto& langs = profiles();
  std::vector<std::size_t> hits(langs.size(), 0);
  for (const auto& token : text::word_tokens(input)) {
    for (std::size_t i = 0; i < langs.size(); ++i) {
      if (langs[i].stopwords.count(token)) ++hits[i];
    }
  }
  auto total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  if (total == 0) return {"und", 0.0};
  auto best = static_cast<std::size_t>(
      std::max_element(hits.begin(), hits.end()) - hits.begin());
  return {std::string(langs[best].language),
          static_cast<double>(hits[best]) / static_cast<double>(total)};
}

ReviewCorpus filter_language(const ReviewCorpus& corpus, std::string_view keep_language,
                             const LanguageDetector& detector, double confidence_floor) {
  ReviewCorpus out;
  for (const auto& r : corpus.reviews) {
    auto d = detector(r.text);
    if (d.language == keep_language && d.confidence >= confidence_floor) {
      out.reviews.push_back(r);
    }
  }
  out.provenance = fmt::format("{}; language filter keeping '{}' (confidence >= {}): {} -> {}",
                               corpus.provenance, keep_language, confidence_floor,
                               corpus.size(), out.size());
  return out;
}

ReviewCorpus select_latest(const ReviewCorpus& corpus, std::size_t n) {
  if (n == 0) throw InvalidArgument("select_latest: n must be >= 1");
  ReviewCorpus out;
  bool any_timestamp = std::any_of(corpus.reviews.begin(), corpus.reviews.end(),
                                   [](const Review& r) { return r.timestamp.has_value(); });
  if (!any_timestamp) {
    auto take = std::min(n, corpus.size());
    out.reviews.assign(corpus.reviews.begin(),
                       corpus.reviews.begin() + static_cast<std::ptrdiff_t>(take));
  } else {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ta = corpus.reviews[a].timestamp;
      const auto& tb = corpus.reviews[b].timestamp;
      if (ta && tb) return *ta > *tb;
      return ta.has_value() && !tb.has_value();
    });
    order.resize(std::min(n, order.size()));
    for (auto i : order) out.reviews.push_back(corpus.reviews[i]);
  }
  out.provenance = fmt::format("{}; latest {} selected ({}): {} -> {}", corpus.provenance, n,
                               any_timestamp ? "by timestamp" : "by file order",
                               corpus.size(), out.size());
  return out;
}

std::string redact_pii(std::string_view input) {
  static const std::regex kEmail(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})");
  static const std::regex kPhone(R"(\+?\(?[0-9](?:[ .\-()]{0,2}[0-9]){6,})");
  std::string s(input);
  s = std::regex_replace(s, kEmail, "[EMAIL]");
  s = std::regex_replace(s, kPhone, "[PHONE]");
  return s;
}

ReviewCorpus redact_pii(const ReviewCorpus& corpus) {
  ReviewCorpus out = corpus;
  std::size_t changed = 0;
  for (auto& r : out.reviews) {
    auto redacted = redact_pii(r.text);
    if (redacted != r.text) ++changed;
    r.text = std::move(redacted);
  }
  out.provenance = fmt::format("{}; PII redacted in {} reviews", corpus.provenance, changed);
  return out;
}

std::string clean_training_text(std::string_view input) {
  static const std::regex kKeywords(R"(\b(implement|review|structure|train)\b)",
                                    std::regex::icase);
  static const std::regex kNumbers(R"(\b[0-9]+(?:[.,][0-9]+)*\b)");
  std::string s = std::regex_replace(std::string(input), kKeywords, "");
  s = std::regex_replace(s, kNumbers, "");

  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (text::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace revinsight::ingest
