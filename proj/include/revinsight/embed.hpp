#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revinsight/errors.hpp"
#include "revinsight/http.hpp"

namespace revinsight::embed {

/// Fixed-dimension, finite-valued sentence embedding.
class EmbeddingVector {
 public:
  /// Throws InvalidArgument when empty or any entry is non-finite.
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

class ZeroNormError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Unit-norm copy. Throws ZeroNormError for the zero vector.
EmbeddingVector l2_normalize(const EmbeddingVector& v);

/// Standard basis vector e_0; stands in for texts with no usable tokens.
EmbeddingVector basis_vector(std::size_t dim);

enum class BackendKind { kRemote, kLocalTest };

inline constexpr std::string_view kDefaultModel = "all-MiniLM-L6-v2";
inline constexpr std::size_t kDefaultLocalDim = 384;

struct EmbeddingBackendConfig {
  BackendKind kind = BackendKind::kLocalTest;
  std::string endpoint;  // full URL of the embeddings route (remote only)
  std::string model_name{kDefaultModel};
  std::size_t batch_size = 32;
  std::optional<std::size_t> expected_dim;
  std::size_t local_dim = kDefaultLocalDim;
  std::string api_key_env;  // empty: no Authorization header
  http::RequestOptions request;
  std::size_t parallelism = 1;  // remote batches in flight at once

  /// Throws ConfigError on a broken config.
  void validate() const;
};

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

/// Bag-of-words encoder: each lowercase word token is hashed (FNV-1a) into one
/// of `dim` buckets and counted. Deterministic and dependency-free.
class HashingEncoder {
 public:
  explicit HashingEncoder(std::size_t dim = kDefaultLocalDim);

  std::size_t dim() const noexcept { return dim_; }

  /// Raw bucket counts (not normalized); all zeros for token-free text.
  std::vector<double> counts(std::string_view text) const;

 private:
  std::size_t dim_;
};

/// Side-channel facts about one encode call.
struct EncodeStats {
  std::vector<std::size_t> degenerate;  // inputs replaced by e_0
  std::size_t requests = 0;
  std::size_t retries = 0;
};

/// Embeds every text, in order, as a unit-norm vector. Zero-norm outputs are
/// replaced by e_0 and reported through `stats`.
///
/// Throws InvalidArgument for an empty list, EmbeddingError when the remote
/// backend fails after retries, returns a malformed body, or the
/// dimension differs between batches or from `expected_dim`.
std::vector<EmbeddingVector> encode(const std::vector<std::string>& texts,
                                    const EmbeddingBackendConfig& config,
                                    EncodeStats* stats = nullptr);

/// Request body for one remote batch: {"model": ..., "input": [...]}.
std::string build_embedding_request(std::string_view model,
                                    std::span<const std::string> texts);

/// Parses {"data": [{"index": i, "embedding": [...]}, ...]} and returns the
/// raw vectors ordered by index. Throws EmbeddingError when indices do not
/// cover 0..expected_count-1 exactly once.
std::vector<std::vector<double>> parse_embedding_response(std::string_view body,
                                                          std::size_t expected_count);

}  // namespace revinsight::embed
