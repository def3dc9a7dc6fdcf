#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "revinsight/review.hpp"

namespace revinsight::synthetic {

/// Seeded generator for review corpora with known topic groups. Each planted
/// review draws most of its content words from one topic's vocabulary, so
/// same-topic reviews land near each other under a bag-of-words encoder while
/// different topics share only function words.
struct PlantedOptions {
  std::size_t size = 300;
  std::size_t topics = 5;          // at most topic_bank_size()
  double noise_fraction = 0.15;    // reviews drawn from generic vocabulary
  double positive_fraction = 0.0;  // share rated 4 or 5 (the rest 1..3)
  bool timestamps = false;
  std::uint64_t seed = 42;
};

struct PlantedCorpus {
  ReviewCorpus corpus;
  std::vector<int> topic;  // per review; -1 for noise
  std::vector<std::string> topic_names;
};

std::size_t topic_bank_size() noexcept;

/// Deterministic in `options`: the same options give byte-identical output on
/// every platform (no std distributions involved).
PlantedCorpus planted_corpus(const PlantedOptions& options);

/// CSV with header "id,text,rating,timestamp,source,topic".
void write_csv(std::ostream& out, const PlantedCorpus& planted);

}  // namespace revinsight::synthetic
