#include "revinsight/synthetic.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <random>
#include <string_view>

#include <fmt/format.h>

#include "revinsight/csv.hpp"
#include "revinsight/errors.hpp"

namespace revinsight::synthetic {

namespace {

struct Topic {
  std::string_view name;
  std::array<std::string_view, 8> words;
};

constexpr std::array<Topic, 8> kTopics{{
    {"waiting", {"waited", "hours", "appointment", "late", "lobby", "delayed", "schedule", "waiting"}},
    {"billing", {"bill", "charged", "insurance", "invoice", "overcharged", "price", "payment", "quote"}},
    {"staff", {"rude", "receptionist", "staff", "attitude", "unprofessional", "disrespectful", "front", "desk"}},
    {"phone", {"phone", "call", "voicemail", "answer", "callback", "unreachable", "hung", "message"}},
    {"pain", {"pain", "painful", "numb", "anesthesia", "needle", "hurt", "procedure", "sore"}},
    {"hygiene", {"dirty", "hygiene", "messy", "unsanitary", "floor", "bathroom", "gloves", "smell"}},
    {"parking", {"parking", "lot", "spaces", "garage", "street", "ticket", "drive", "location"}},
    {"upselling", {"upsell", "unnecessary", "treatment", "pushy", "sales", "recommended", "scam", "expensive"}},
}};

constexpr std::array<std::string_view, 24> kGeneric{
    "honestly", "today", "again", "really", "office", "visit", "dentist", "clinic",
    "never",    "always", "experience", "week", "family", "doctor", "teeth", "cleaning",
    "friendly", "place", "service", "nothing", "overall", "year", "first", "time"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::string topic_review(const Topic& topic, Rng& rng) {
  std::vector<std::string_view> words(topic.words.begin(), topic.words.end());
  rng.shuffle(words);
  std::string text = fmt::format("{} {} the {} and {} was {}", words[0], words[1], words[2],
                                 words[3], words[4]);
  auto fillers = rng.below(3);
  for (std::size_t i = 0; i < fillers; ++i) {
    text += ' ';
    text += kGeneric[rng.below(kGeneric.size())];
  }
  return text;
}

std::string noise_review(Rng& rng) {
  std::string text = "the";
  auto words = 5 + rng.below(4);
  for (std::size_t i = 0; i < words; ++i) {
    text += i == 2 ? " and " : " ";
    text += kGeneric[rng.below(kGeneric.size())];
  }
  return text + " was fine";
}

}  // namespace

std::size_t topic_bank_size() noexcept { return kTopics.size(); }

PlantedCorpus planted_corpus(const PlantedOptions& options) {
  if (options.topics < 1 || options.topics > kTopics.size()) {
    throw InvalidArgument(fmt::format("topics must be in 1..{}", kTopics.size()));
  }
  if (options.size < 1) throw InvalidArgument("size must be >= 1");
  Rng rng(options.seed);

  // Topic of each slot: noise first, then topics round-robin with a random
  // skew so planted groups differ in size.
  auto noise = static_cast<std::size_t>(static_cast<double>(options.size) * options.noise_fraction);
  noise = std::min(noise, options.size);
  std::vector<int> labels(noise, -1);
  std::vector<double> weight(options.topics);
  for (auto& w : weight) w = 0.5 + rng.unit();
  double total_weight = 0.0;
  for (double w : weight) total_weight += w;
  while (labels.size() < options.size) {
    double pick = rng.unit() * total_weight;
    std::size_t t = 0;
    while (t + 1 < weight.size() && pick >= weight[t]) pick -= weight[t++];
    labels.push_back(static_cast<int>(t));
  }
  rng.shuffle(labels);

  PlantedCorpus out;
  for (std::size_t t = 0; t < options.topics; ++t) out.topic_names.emplace_back(kTopics[t].name);
  const Timestamp base{std::chrono::seconds{1704067200}};  // 2024-01-01T00:00:00Z
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Review r;
    r.id = fmt::format("r{:04d}", i);
    r.text = labels[i] < 0 ? noise_review(rng)
                           : topic_review(kTopics[static_cast<std::size_t>(labels[i])], rng);
    bool positive = rng.unit() < options.positive_fraction;
    r.rating = static_cast<int>(positive ? 4 + rng.below(2) : 1 + rng.below(3));
    if (options.timestamps) {
      r.timestamp = base + std::chrono::seconds{static_cast<long long>(rng.below(365 * 86400))};
    }
    r.source = std::string(i % 3 == 0 ? "google" : (i % 3 == 1 ? "yelp" : "facebook"));
    out.corpus.reviews.push_back(std::move(r));
  }
  out.topic = std::move(labels);
  out.corpus.provenance = fmt::format("planted corpus (size={}, topics={}, seed={})",
                                      options.size, options.topics, options.seed);
  return out;
}

void write_csv(std::ostream& out, const PlantedCorpus& planted) {
  csv::write_row(out, {"id", "text", "rating", "timestamp", "source", "topic"});
  for (std::size_t i = 0; i < planted.corpus.size(); ++i) {
    const auto& r = planted.corpus.reviews[i];
    auto t = planted.topic[i];
    csv::write_row(out, {r.id, r.text, r.rating ? std::to_string(*r.rating) : "",
                         r.timestamp ? format_timestamp(*r.timestamp) : "",
                         r.source.value_or(""),
                         t < 0 ? "noise" : planted.topic_names[static_cast<std::size_t>(t)]});
  }
}

}  // namespace revinsight::synthetic
