#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "revinsight/recommend.hpp"
#include "revinsight/simcluster.hpp"

namespace revinsight::report {

struct ReportEntry {
  cluster::Cluster cluster;
  recommend::GenerationRecord generation;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct Failure {
  std::string representative_id;
  std::string error;

  friend bool operator==(const Failure&, const Failure&) = default;
};

struct RunReport {
  std::string run_id;
  Timestamp created_at{};
  std::string corpus_provenance;
  cluster::ClusterParams params;
  std::vector<ReportEntry> entries;  // non-failed clusters, cluster order
  std::vector<Failure> failures;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Pairs clusters with their generation records (matched by position and
/// checked by representative id). Failed records go to `failures`.
RunReport assemble_report(std::string run_id, Timestamp created_at,
                          std::string corpus_provenance,
                          const cluster::ClusteringResult& result,
                          const std::vector<recommend::GenerationRecord>& records);

enum class Format { kJson, kMarkdown, kCsv };

struct EmitOptions {
  /// Per-request latency and retry counts. They vary run to run, so the CLI
  /// keeps them out of report.json and logs them in generations.jsonl.
  bool include_timings = true;
};

/// json: lossless, keys sorted. markdown: one section per cluster.
/// csv: one row per (cluster, recommendation); a cluster without any parsed
/// recommendation still gets one row with blank issue/advice.
std::string emit_run_report(const RunReport& report, Format format,
                            const EmitOptions& options = {});

RunReport run_report_from_json(const nlohmann::json& j);

// ---- Annotation sheet and coherence ---------------------------------------

inline constexpr std::string_view kAnnotationHeader =
    "review_id,review_text,cluster_id,primary_topic,secondary_topic";

struct AnnotationRow {
  std::string review_id;
  std::string review_text;
  std::size_t cluster_id = 0;  // index into ClusteringResult::clusters
  std::string primary_topic;
  std::string secondary_topic;

  friend bool operator==(const AnnotationRow&, const AnnotationRow&) = default;
};

struct AnnotationSheet {
  std::vector<AnnotationRow> rows;

  friend bool operator==(const AnnotationSheet&, const AnnotationSheet&) = default;
};

/// One row per representative and member, topics blank. Texts come from the
/// pool. Throws InvalidArgument for an empty result or an id the pool lacks.
AnnotationSheet export_annotation_sheet(const cluster::ClusteringResult& result,
                                        const ReviewCorpus& pool);

std::string to_csv(const AnnotationSheet& sheet);

/// Throws IoError on a malformed sheet or a header other than
/// kAnnotationHeader.
AnnotationSheet parse_annotation_sheet(std::string_view csv_data);

struct ClusterCoherence {
  std::size_t cluster_id = 0;
  std::size_t matched = 0;
  std::size_t total = 0;
  double fraction = 0.0;
};

struct CoherenceScore {
  std::vector<ClusterCoherence> per_cluster;
  bool overall_pass = false;
};

/// A review matches when its primary or secondary topic equals the cluster's
/// topic after trimming and ASCII case folding. Passes when every cluster's
/// fraction reaches `pass_threshold`.
/// Throws InvalidArgument listing any clustered review without an annotation
/// row, or naming a cluster without an assigned topic.
CoherenceScore coherence(const cluster::ClusteringResult& result,
                         const AnnotationSheet& annotated,
                         const std::map<std::size_t, std::string>& cluster_topics,
                         double pass_threshold = 0.8);

// ---- Timing harness --------------------------------------------------------

struct BenchInput {
  ReviewCorpus pool;
  std::vector<embed::EmbeddingVector> vectors;
};

/// Supplies a pool and its precomputed vectors for a given size.
using VectorsProvider = std::function<BenchInput(std::size_t size, std::uint64_t seed)>;

/// Planted-cluster corpus (5 topics) encoded with the hashing encoder.
BenchInput planted_vectors(std::size_t size, std::uint64_t seed);

struct BenchOptions {
  std::vector<std::size_t> pool_sizes{100, 300};
  std::vector<cluster::Method> methods{cluster::Method::kBaseline, cluster::Method::kIterative};
  std::size_t repeats = 5;
  std::uint64_t seed = 42;
  cluster::ClusterParams params;  // iterative; baselines use its threshold and cluster count
};

struct BenchRow {
  cluster::Method method;
  std::size_t pool_size = 0;
  double median_seconds = 0.0;
  std::vector<double> samples;
  bool outputs_consistent = true;  // every repetition produced the same clusters
};

/// Times the clustering stage only (similarity matrix plus extraction) for
/// each (size, method), methods run one after another.
std::vector<BenchRow> bench(const BenchOptions& options,
                            const VectorsProvider& provider = planted_vectors);

double median(std::vector<double> samples);

/// A '#' comment line noting that embedding time is excluded, then
/// "method,pool_size,seconds" and one row per (method, size).
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, std::size_t repeats);

}  // namespace revinsight::report
