#include "revinsight/simcluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "revinsight/csv.hpp"

namespace revinsight::cluster {

using nlohmann::json;

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> row_ids, std::vector<double> entries)
    : row_ids_(std::move(row_ids)), entries_(std::move(entries)) {
  const auto size = row_ids_.size();
  if (entries_.size() != size * size) {
    throw InvalidArgument(fmt::format("similarity matrix needs {} entries, got {}",
                                      size * size, entries_.size()));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : row_ids_) {
    if (!seen.insert(id).second) throw InvalidArgument(fmt::format("duplicate row id '{}'", id));
  }
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i + 1; j < size; ++j) {
      if (entries_[i * size + j] != entries_[j * size + i]) {
        throw InvalidArgument(fmt::format("similarity matrix not symmetric at ({}, {})", i, j));
      }
    }
  }
}

SimilarityMatrix cosine_similarity_matrix(std::span<const EmbeddingVector> vectors,
                                          std::vector<std::string> row_ids) {
  const auto n = vectors.size();
  if (n == 0) throw InvalidArgument("cosine_similarity_matrix: no vectors");
  if (row_ids.empty()) {
    row_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_ids.push_back(std::to_string(i));
  } else if (row_ids.size() != n) {
    throw InvalidArgument("cosine_similarity_matrix: one id per vector required");
  }
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : row_ids) {
      if (!seen.insert(id).second) throw InvalidArgument(fmt::format("duplicate row id '{}'", id));
    }
  }

  const auto dim = vectors[0].dim();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].dim() != dim) {
      throw InvalidArgument(
          fmt::format("vector {} has dim {}, expected {}", i, vectors[i].dim(), dim));
    }
    norms[i] = vectors[i].norm();
    if (norms[i] == 0.0) throw InvalidArgument(fmt::format("vector {} has zero norm", i));
  }

  std::vector<double> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i * n + i] = 1.0;
    auto vi = vectors[i].values();
    for (std::size_t j = i + 1; j < n; ++j) {
      auto vj = vectors[j].values();
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += vi[d] * vj[d];
      double s = dot / (norms[i] * norms[j]);
      entries[i * n + j] = s;
      entries[j * n + i] = s;
    }
  }
  return SimilarityMatrix(SimilarityMatrix::Unchecked{}, std::move(row_ids), std::move(entries));
}

SimilarityMatrix normalize_matrix(SimilarityMatrix m) {
  const auto n = m.n();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& e = m.entries_[i * n + j];
      e = (i == j) ? 1.0 : std::clamp(e, 0.0, 1.0);
    }
  }
  return m;
}

std::vector<std::size_t> find_similar(const SimilarityMatrix& m, std::size_t row,
                                      double threshold) {
  if (row >= m.n()) throw InvalidArgument(fmt::format("row {} out of range", row));
  std::vector<std::size_t> out;
  auto r = m.row(row);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (j != row && r[j] > threshold) out.push_back(j);
  }
  return out;
}

void ClusterParams::validate() const {
  if (!(initial_threshold > 0.0 && initial_threshold < 1.0)) {
    throw InvalidArgument(fmt::format("threshold {} must lie in (0, 1)", initial_threshold));
  }
  if (!(threshold_decline >= 0.0) || !std::isfinite(threshold_decline)) {
    throw InvalidArgument(fmt::format("decline {} must be >= 0", threshold_decline));
  }
  if (num_clusters < 1) throw InvalidArgument("num_clusters must be >= 1");
  if (!(threshold_at(num_clusters - 1) > 0.0)) {
    throw InvalidArgument(fmt::format(
        "threshold {} with decline {} over {} clusters ends at {} (must stay > 0)",
        initial_threshold, threshold_decline, num_clusters, threshold_at(num_clusters - 1)));
  }
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kIterative: return "iterative";
    case Method::kBaseline: return "baseline";
    case Method::kWordLevel: return "word_level";
  }
  return "iterative";
}

Method method_from_string(std::string_view name) {
  if (name == "iterative") return Method::kIterative;
  if (name == "baseline") return Method::kBaseline;
  if (name == "word_level") return Method::kWordLevel;
  throw ConfigError(
      fmt::format("unknown clustering method '{}' (valid: iterative, baseline, word_level)", name));
}

ClusteringResult extract_clusters(const SimilarityMatrix& m, std::span<const std::string> texts,
                                  const ClusterParams& params) {
  params.validate();
  const auto n = m.n();
  if (texts.size() != n) throw InvalidArgument("extract_clusters: one text per matrix row required");

  ClusteringResult result;
  result.method = Method::kIterative;
  result.params = params;
  result.pool_size = n;

  // Deleted rows/columns are masked out instead of compacting the matrix;
  // surviving rows keep their relative order, so "lowest index" is the same
  // under either representation.
  std::vector<char> active(n, 1);
  std::size_t remaining = n;

  for (std::size_t k = 0; k < params.num_clusters && remaining > 0; ++k) {
    const double threshold = params.threshold_at(k);
    std::size_t best = n;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      auto row = m.row(i);
      std::size_t count = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (active[j] && j != i && row[j] > threshold) ++count;
      }
      if (best == n || count > best_count) {
        best = i;
        best_count = count;
      }
    }

    Cluster c;
    c.representative_id = m.row_ids()[best];
    c.representative_text = texts[best];
    c.threshold_used = threshold;
    c.iteration = k;
    auto row = m.row(best);
    for (std::size_t j = 0; j < n; ++j) {
      if (active[j] && j != best && row[j] > threshold) {
        c.member_ids.push_back(m.row_ids()[j]);
        active[j] = 0;
      }
    }
    active[best] = 0;
    c.weight = c.member_ids.size();
    remaining -= c.weight + 1;
    result.clusters.push_back(std::move(c));
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) result.residual_ids.push_back(m.row_ids()[i]);
  }
  return result;
}

namespace {

void check_pool(const ReviewCorpus& pool, std::span<const EmbeddingVector> vectors) {
  if (pool.size() != vectors.size()) {
    throw InvalidArgument(fmt::format("pool has {} reviews but {} vectors", pool.size(),
                                      vectors.size()));
  }
}

std::vector<std::string> ids_of(const ReviewCorpus& pool) {
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const auto& r : pool.reviews) ids.push_back(r.id);
  return ids;
}

std::vector<std::string> texts_of(const ReviewCorpus& pool) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& r : pool.reviews) texts.push_back(r.text);
  return texts;
}

}  // namespace

ClusteringResult process_reviews(const ReviewCorpus& pool, std::span<const EmbeddingVector> vectors,
                                 const ClusterParams& params) {
  params.validate();
  check_pool(pool, vectors);
  if (pool.empty()) {
    ClusteringResult empty;
    empty.params = params;
    return empty;
  }
  auto matrix = normalize_matrix(cosine_similarity_matrix(vectors, ids_of(pool)));
  return extract_clusters(matrix, texts_of(pool), params);
}

std::vector<Cluster> baseline_clusters(const SimilarityMatrix& m, std::span<const std::string> texts,
                                       double threshold, std::size_t k) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument(fmt::format("threshold {} must lie in [0, 1]", threshold));
  }
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const auto n = m.n();
  if (texts.size() != n) throw InvalidArgument("baseline: one text per matrix row required");

  std::vector<std::vector<std::size_t>> similar(n);
  for (std::size_t i = 0; i < n; ++i) similar[i] = find_similar(m, i, threshold);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return similar[a].size() > similar[b].size();
  });
  order.resize(std::min(k, n));

  std::vector<Cluster> out;
  for (auto i : order) {
    Cluster c;
    c.representative_id = m.row_ids()[i];
    c.representative_text = texts[i];
    for (auto j : similar[i]) c.member_ids.push_back(m.row_ids()[j]);
    c.weight = c.member_ids.size();
    c.threshold_used = threshold;
    c.iteration = 0;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Cluster> baseline_cluster(const ReviewCorpus& pool,
                                      std::span<const EmbeddingVector> vectors, double threshold,
                                      std::size_t k) {
  check_pool(pool, vectors);
  if (pool.empty()) return {};
  auto matrix = normalize_matrix(cosine_similarity_matrix(vectors, ids_of(pool)));
  return baseline_clusters(matrix, texts_of(pool), threshold, k);
}

std::vector<Cluster> word_level_baseline(const ReviewCorpus& pool,
                                         std::span<const EmbeddingVector> token_vectors,
                                         double threshold, std::size_t k) {
  return baseline_cluster(pool, token_vectors, threshold, k);
}

ClusteringResult baseline_result(const ReviewCorpus& pool, std::vector<Cluster> clusters,
                                 Method method, double threshold) {
  ClusteringResult r;
  r.method = method;
  r.params = ClusterParams{threshold, 0.0, std::max<std::size_t>(clusters.size(), 1)};
  r.pool_size = pool.size();
  std::unordered_set<std::string> used;
  for (const auto& c : clusters) {
    used.insert(c.representative_id);
    used.insert(c.member_ids.begin(), c.member_ids.end());
  }
  for (const auto& rv : pool.reviews) {
    if (!used.count(rv.id)) r.residual_ids.push_back(rv.id);
  }
  r.clusters = std::move(clusters);
  return r;
}

double average_top_size(const ClusteringResult& result, std::size_t top_m,
                        bool include_representative) {
  auto m = std::min(top_m, result.clusters.size());
  if (m == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = result.clusters[i];
    total += static_cast<double>(include_representative ? c.size() : c.weight);
  }
  return total / static_cast<double>(m);
}

SweepTable sweep(const ReviewCorpus& pool, std::span<const EmbeddingVector> vectors,
                 const SweepOptions& options) {
  if (options.thresholds.empty() || options.declines.empty()) {
    throw InvalidArgument("sweep needs at least one threshold and one decline");
  }
  if (options.top_m < 1) throw InvalidArgument("top_m must be >= 1");
  check_pool(pool, vectors);

  SweepTable table;
  table.top_m = options.top_m;
  table.size_includes_representative = options.size_includes_representative;

  std::optional<SimilarityMatrix> matrix;
  std::vector<std::string> texts;
  if (!pool.empty()) {
    matrix = normalize_matrix(cosine_similarity_matrix(vectors, ids_of(pool)));
    texts = texts_of(pool);
  }

  for (double thr : options.thresholds) {
    for (double decline : options.declines) {
      SweepCell cell{thr, decline, std::nullopt, {}};
      ClusterParams params{thr, decline, options.num_clusters};
      try {
        params.validate();
        ClusteringResult result;
        if (matrix) result = extract_clusters(*matrix, texts, params);
        cell.avg_cluster_size =
            average_top_size(result, options.top_m, options.size_includes_representative);
      } catch (const InvalidArgument& e) {
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "threshold,decline_rate,avg_cluster_size_top3\n";
  for (const auto& c : table.cells) {
    std::string value = c.avg_cluster_size
                            ? fmt::format("{}", std::lround(*c.avg_cluster_size))
                            : std::string("error");
    csv::write_row(out, {fmt::format("{}", c.threshold), fmt::format("{}", c.decline), value});
  }
}

json to_json(const ClusterParams& p) {
  return json{{"threshold", p.initial_threshold},
              {"decline", p.threshold_decline},
              {"num_clusters", p.num_clusters}};
}

json to_json(const Cluster& c) {
  return json{{"representative_id", c.representative_id},
              {"representative_text", c.representative_text},
              {"member_ids", c.member_ids},
              {"weight", c.weight},
              {"threshold_used", c.threshold_used},
              {"iteration", c.iteration}};
}

json to_json(const ClusteringResult& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) clusters.push_back(to_json(c));
  return json{{"method", to_string(r.method)},
              {"params", to_json(r.params)},
              {"pool_size", r.pool_size},
              {"clusters", std::move(clusters)},
              {"residual_ids", r.residual_ids}};
}

ClusterParams params_from_json(const json& j) {
  return ClusterParams{j.at("threshold").get<double>(), j.at("decline").get<double>(),
                       j.at("num_clusters").get<std::size_t>()};
}

Cluster cluster_from_json(const json& j) {
  Cluster c;
  c.representative_id = j.at("representative_id").get<std::string>();
  c.representative_text = j.at("representative_text").get<std::string>();
  c.member_ids = j.at("member_ids").get<std::vector<std::string>>();
  c.weight = j.at("weight").get<std::size_t>();
  c.threshold_used = j.at("threshold_used").get<double>();
  c.iteration = j.at("iteration").get<std::size_t>();
  if (c.weight != c.member_ids.size()) {
    throw InvalidArgument(fmt::format("cluster '{}' weight {} != {} members", c.representative_id,
                                      c.weight, c.member_ids.size()));
  }
  return c;
}

ClusteringResult result_from_json(const json& j) {
  ClusteringResult r;
  r.method = method_from_string(j.value("method", std::string("iterative")));
  r.params = params_from_json(j.at("params"));
  r.pool_size = j.at("pool_size").get<std::size_t>();
  for (const auto& c : j.at("clusters")) r.clusters.push_back(cluster_from_json(c));
  r.residual_ids = j.at("residual_ids").get<std::vector<std::string>>();
  return r;
}

}  // namespace revinsight::cluster
