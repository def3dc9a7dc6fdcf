#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "revinsight/embed.hpp"
#include "revinsight/review.hpp"

namespace revinsight::cluster {

using embed::EmbeddingVector;

/// Dense symmetric n×n similarity table over the review pool, row-major.
class SimilarityMatrix {
 public:
  /// Throws InvalidArgument unless entries.size() == ids.size()^2, the table
  /// is exactly symmetric, and ids are unique.
  SimilarityMatrix(std::vector<std::string> row_ids, std::vector<double> entries);

  std::size_t n() const noexcept { return row_ids_.size(); }
  double at(std::size_t i, std::size_t j) const { return entries_[i * n() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * n(), n());
  }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  friend SimilarityMatrix normalize_matrix(SimilarityMatrix m);
  friend SimilarityMatrix cosine_similarity_matrix(std::span<const EmbeddingVector>,
                                                   std::vector<std::string>);
  struct Unchecked {};
  SimilarityMatrix(Unchecked, std::vector<std::string> row_ids, std::vector<double> entries)
      : row_ids_(std::move(row_ids)), entries_(std::move(entries)) {}

  std::vector<std::string> row_ids_;
  std::vector<double> entries_;
};

/// Pairwise cosine similarity; the upper triangle is computed and mirrored
/// and the diagonal is exactly 1. Ids default to "0".."n-1".
/// Throws InvalidArgument on an empty list, mixed dims or a zero vector.
SimilarityMatrix cosine_similarity_matrix(std::span<const EmbeddingVector> vectors,
                                          std::vector<std::string> row_ids = {});

/// Clamps every off-diagonal entry into [0, 1] and sets the diagonal to 1.
SimilarityMatrix normalize_matrix(SimilarityMatrix m);

/// Indices j != row whose similarity strictly exceeds `threshold`, ascending.
std::vector<std::size_t> find_similar(const SimilarityMatrix& m, std::size_t row,
                                      double threshold);

struct ClusterParams {
  double initial_threshold = 0.70;
  double threshold_decline = 0.01;
  std::size_t num_clusters = 10;

  /// Threshold used at 0-based iteration k.
  double threshold_at(std::size_t k) const noexcept {
    return initial_threshold - static_cast<double>(k) * threshold_decline;
  }

  /// Throws InvalidArgument unless initial_threshold is in (0,1), the decline
  /// is non-negative, num_clusters >= 1, and the last threshold stays > 0.
  void validate() const;

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

struct Cluster {
  std::string representative_id;
  std::string representative_text;
  std::vector<std::string> member_ids;  // excludes the representative
  std::size_t weight = 0;               // == member_ids.size()
  double threshold_used = 0.0;
  std::size_t iteration = 0;

  std::size_t size() const noexcept { return weight + 1; }

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

enum class Method { kIterative, kBaseline, kWordLevel };

std::string_view to_string(Method m);
/// Throws ConfigError for an unknown name.
Method method_from_string(std::string_view name);

struct ClusteringResult {
  Method method = Method::kIterative;
  std::vector<Cluster> clusters;  // selection order
  std::vector<std::string> residual_ids;
  ClusterParams params;
  std::size_t pool_size = 0;

  friend bool operator==(const ClusteringResult&, const ClusteringResult&) = default;
};

/// Greedy extraction over an already-normalized matrix. Each iteration k
/// picks, among rows still in the pool, the one with the most neighbours
/// above threshold_at(k) (ties: lowest index), emits it with those
/// neighbours as members, and removes all of them from the pool. Stops after
/// num_clusters iterations or when the pool is empty.
ClusteringResult extract_clusters(const SimilarityMatrix& normalized,
                                  std::span<const std::string> texts,
                                  const ClusterParams& params);

/// Embeddings to clusters: cosine matrix, clamp normalization, then
/// extract_clusters. An empty pool yields an empty result.
ClusteringResult process_reviews(const ReviewCorpus& pool,
                                 std::span<const EmbeddingVector> vectors,
                                 const ClusterParams& params = {});

/// Single pass over the full matrix with a fixed threshold and no removal:
/// the top-k rows by neighbour count, so clusters may overlap.
std::vector<Cluster> baseline_clusters(const SimilarityMatrix& normalized,
                                       std::span<const std::string> texts, double threshold,
                                       std::size_t k);

std::vector<Cluster> baseline_cluster(const ReviewCorpus& pool,
                                      std::span<const EmbeddingVector> vectors,
                                      double threshold = 0.70, std::size_t k = 10);

/// Baseline run with the word-level default threshold. The vectors can come
/// from any encoder; the name only fixes the configuration.
inline constexpr double kWordLevelThreshold = 0.68;

std::vector<Cluster> word_level_baseline(const ReviewCorpus& pool,
                                         std::span<const EmbeddingVector> token_vectors,
                                         double threshold = kWordLevelThreshold,
                                         std::size_t k = 10);

/// Wraps baseline clusters in a result; residual ids are the reviews that
/// appear in no cluster.
ClusteringResult baseline_result(const ReviewCorpus& pool, std::vector<Cluster> clusters,
                                 Method method, double threshold);

// ---- Parameter sweep ------------------------------------------------------

struct SweepOptions {
  std::vector<double> thresholds{0.68, 0.69, 0.70, 0.71, 0.72};
  std::vector<double> declines{0.0, 0.005, 0.01, 0.015, 0.02};
  std::size_t top_m = 3;
  std::size_t num_clusters = 10;
  bool size_includes_representative = true;
};

struct SweepCell {
  double threshold = 0.0;
  double decline = 0.0;
  std::optional<double> avg_cluster_size;  // exact mean; empty on error
  std::string error;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepTable {
  std::vector<SweepCell> cells;  // threshold-major, then decline
  std::size_t top_m = 3;
  bool size_includes_representative = true;
};

/// Mean size of the first `top_m` clusters (fewer if fewer were found; 0 for
/// none). Size is weight + 1, or weight when the representative is excluded.
double average_top_size(const ClusteringResult& result, std::size_t top_m,
                        bool include_representative = true);

/// Runs process_reviews for every (threshold, decline) pair. A pair that
/// violates ClusterParams becomes an error cell.
SweepTable sweep(const ReviewCorpus& pool, std::span<const EmbeddingVector> vectors,
                 const SweepOptions& options = {});

/// "threshold,decline_rate,avg_cluster_size_top3" then one row per cell with
/// the mean rounded to the nearest integer ("error" for error cells).
void write_sweep_csv(std::ostream& out, const SweepTable& table);

// ---- Serialization --------------------------------------------------------

nlohmann::json to_json(const ClusterParams& p);
nlohmann::json to_json(const Cluster& c);
nlohmann::json to_json(const ClusteringResult& r);
ClusterParams params_from_json(const nlohmann::json& j);
Cluster cluster_from_json(const nlohmann::json& j);
ClusteringResult result_from_json(const nlohmann::json& j);

}  // namespace revinsight::cluster
