#include "revinsight/report.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "revinsight/csv.hpp"
#include "revinsight/errors.hpp"
#include "revinsight/synthetic.hpp"
#include "revinsight/text.hpp"

namespace revinsight::report {

using nlohmann::json;

RunReport assemble_report(std::string run_id, Timestamp created_at, std::string corpus_provenance,
                          const cluster::ClusteringResult& result,
                          const std::vector<recommend::GenerationRecord>& records) {
  if (records.size() != result.clusters.size()) {
    throw InvalidArgument(fmt::format("{} clusters but {} generation records",
                                      result.clusters.size(), records.size()));
  }
  RunReport r;
  r.run_id = std::move(run_id);
  r.created_at = created_at;
  r.corpus_provenance = std::move(corpus_provenance);
  r.params = result.params;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& c = result.clusters[i];
    const auto& g = records[i];
    if (g.representative_id != c.representative_id) {
      throw InvalidArgument(fmt::format("record {} is for '{}' but cluster is '{}'", i,
                                        g.representative_id, c.representative_id));
    }
    if (g.failed()) {
      r.failures.push_back({c.representative_id, *g.error});
    } else {
      r.entries.push_back({c, g});
    }
  }
  return r;
}

namespace {

json report_json(const RunReport& r, const EmitOptions& options) {
  json clusters = json::array();
  for (const auto& e : r.entries) {
    auto c = cluster::to_json(e.cluster);
    c["generation"] = recommend::to_json(e.generation, options.include_timings);
    clusters.push_back(std::move(c));
  }
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"representative_id", f.representative_id}, {"error", f.error}});
  }
  return json{{"run_id", r.run_id},
              {"created_at", format_timestamp(r.created_at)},
              {"corpus_provenance", r.corpus_provenance},
              {"params", cluster::to_json(r.params)},
              {"clusters", std::move(clusters)},
              {"failures", std::move(failures)}};
}

std::string quote_block(std::string_view s) {
  std::string out = "> ";
  for (char c : s) {
    out.push_back(c);
    if (c == '\n') out += "> ";
  }
  return out;
}

std::string report_markdown(const RunReport& r) {
  std::ostringstream md;
  md << "# Review insights report\n\n";
  md << "- Run: " << r.run_id << "\n";
  md << "- Created: " << format_timestamp(r.created_at) << "\n";
  md << "- Corpus: " << r.corpus_provenance << "\n";
  md << fmt::format("- Parameters: threshold {}, decline {}, clusters {}\n", r.params.initial_threshold,
                    r.params.threshold_decline, r.params.num_clusters);
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    md << fmt::format("\n## Cluster {} (weight {}, threshold {})\n\n", i + 1, e.cluster.weight,
                      e.cluster.threshold_used);
    md << quote_block(e.cluster.representative_text) << "\n\n";
    if (e.generation.recommendations.empty()) {
      md << "_No ISSUE/ADVICE pair could be parsed from the response._\n";
    }
    for (const auto& rec : e.generation.recommendations) {
      md << "<u>**ISSUE:**</u> " << rec.issue << "  \n";
      md << "<u>**ADVICE:**</u> " << rec.advice << "\n\n";
    }
  }
  if (!r.failures.empty()) {
    md << "\n## Failures\n\n";
    for (const auto& f : r.failures) md << "- " << f.representative_id << ": " << f.error << "\n";
  }
  return md.str();
}

std::string report_csv(const RunReport& r) {
  std::ostringstream out;
  csv::write_row(out, {"cluster_index", "representative_id", "weight", "threshold_used", "issue",
                       "advice"});
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    std::vector<std::string> prefix{std::to_string(i), e.cluster.representative_id,
                                    std::to_string(e.cluster.weight),
                                    fmt::format("{}", e.cluster.threshold_used)};
    if (e.generation.recommendations.empty()) {
      auto row = prefix;
      row.insert(row.end(), {"", ""});
      csv::write_row(out, row);
    }
    for (const auto& rec : e.generation.recommendations) {
      auto row = prefix;
      row.push_back(rec.issue);
      row.push_back(rec.advice);
      csv::write_row(out, row);
    }
  }
  return out.str();
}

}  // namespace

std::string emit_run_report(const RunReport& report, Format format, const EmitOptions& options) {
  switch (format) {
    case Format::kJson: return report_json(report, options).dump(2) + "\n";
    case Format::kMarkdown: return report_markdown(report);
    case Format::kCsv: return report_csv(report);
  }
  return {};
}

RunReport run_report_from_json(const json& j) {
  RunReport r;
  r.run_id = j.at("run_id").get<std::string>();
  auto ts = parse_timestamp(j.at("created_at").get<std::string>());
  if (!ts) throw IoError("report has an unparseable created_at");
  r.created_at = *ts;
  r.corpus_provenance = j.at("corpus_provenance").get<std::string>();
  r.params = cluster::params_from_json(j.at("params"));
  for (const auto& c : j.at("clusters")) {
    r.entries.push_back({cluster::cluster_from_json(c), recommend::record_from_json(c.at("generation"))});
  }
  for (const auto& f : j.at("failures")) {
    r.failures.push_back({f.at("representative_id").get<std::string>(), f.at("error").get<std::string>()});
  }
  return r;
}

AnnotationSheet export_annotation_sheet(const cluster::ClusteringResult& result,
                                        const ReviewCorpus& pool) {
  if (result.clusters.empty()) throw InvalidArgument("annotation sheet: result has no clusters");
  std::unordered_map<std::string_view, std::string_view> text_of;
  for (const auto& r : pool.reviews) text_of.emplace(r.id, r.text);
  auto lookup = [&](const std::string& id) -> std::string {
    auto it = text_of.find(id);
    if (it == text_of.end()) throw InvalidArgument(fmt::format("review '{}' is not in the pool", id));
    return std::string(it->second);
  };

  AnnotationSheet sheet;
  for (std::size_t k = 0; k < result.clusters.size(); ++k) {
    const auto& c = result.clusters[k];
    sheet.rows.push_back({c.representative_id, c.representative_text, k, "", ""});
    for (const auto& id : c.member_ids) sheet.rows.push_back({id, lookup(id), k, "", ""});
  }
  return sheet;
}

std::string to_csv(const AnnotationSheet& sheet) {
  std::ostringstream out;
  out << kAnnotationHeader << '\n';
  for (const auto& r : sheet.rows) {
    csv::write_row(out, {r.review_id, r.review_text, std::to_string(r.cluster_id), r.primary_topic,
                         r.secondary_topic});
  }
  return out.str();
}

AnnotationSheet parse_annotation_sheet(std::string_view csv_data) {
  csv::Reader reader(csv_data);
  auto header = reader.next();
  if (!header || !header->ok()) throw IoError("annotation sheet: missing header");
  std::string joined;
  for (const auto& f : header->fields) joined += (joined.empty() ? "" : ",") + f;
  if (joined != kAnnotationHeader) {
    throw IoError(fmt::format("annotation sheet: expected header '{}', got '{}'", kAnnotationHeader,
                              joined));
  }
  AnnotationSheet sheet;
  while (auto rec = reader.next()) {
    if (!rec->ok()) throw IoError(fmt::format("annotation sheet line {}: {}", rec->line, rec->error));
    if (rec->fields.size() != 5) {
      throw IoError(fmt::format("annotation sheet line {}: expected 5 fields", rec->line));
    }
    AnnotationRow row;
    row.review_id = rec->fields[0];
    row.review_text = rec->fields[1];
    try {
      std::size_t used = 0;
      row.cluster_id = std::stoul(rec->fields[2], &used);
      if (used != rec->fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw IoError(fmt::format("annotation sheet line {}: bad cluster_id '{}'", rec->line,
                                rec->fields[2]));
    }
    row.primary_topic = rec->fields[3];
    row.secondary_topic = rec->fields[4];
    sheet.rows.push_back(std::move(row));
  }
  return sheet;
}

namespace {

std::string fold(std::string_view topic) { return text::to_lower_ascii(text::trim(topic)); }

}  // namespace

CoherenceScore coherence(const cluster::ClusteringResult& result, const AnnotationSheet& annotated,
                         const std::map<std::size_t, std::string>& cluster_topics,
                         double pass_threshold) {
  std::map<std::pair<std::size_t, std::string>, const AnnotationRow*> by_key;
  for (const auto& row : annotated.rows) by_key.emplace(std::pair{row.cluster_id, row.review_id}, &row);

  std::vector<std::string> missing;
  CoherenceScore score;
  score.overall_pass = true;
  for (std::size_t k = 0; k < result.clusters.size(); ++k) {
    const auto& c = result.clusters[k];
    auto topic_it = cluster_topics.find(k);
    if (topic_it == cluster_topics.end() || fold(topic_it->second).empty()) {
      throw InvalidArgument(fmt::format("cluster {} has no assigned topic", k));
    }
    const auto topic = fold(topic_it->second);

    std::vector<std::string> ids{c.representative_id};
    ids.insert(ids.end(), c.member_ids.begin(), c.member_ids.end());
    ClusterCoherence cc{k, 0, ids.size(), 0.0};
    for (const auto& id : ids) {
      auto row = by_key.find({k, id});
      if (row == by_key.end()) {
        missing.push_back(fmt::format("{} (cluster {})", id, k));
        continue;
      }
      if (fold(row->second->primary_topic) == topic || fold(row->second->secondary_topic) == topic) {
        ++cc.matched;
      }
    }
    cc.fraction = static_cast<double>(cc.matched) / static_cast<double>(cc.total);
    score.overall_pass = score.overall_pass && cc.fraction >= pass_threshold;
    score.per_cluster.push_back(cc);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw InvalidArgument(fmt::format("missing annotation rows: {}", list));
  }
  return score;
}

BenchInput planted_vectors(std::size_t size, std::uint64_t seed) {
  synthetic::PlantedOptions opts;
  opts.size = size;
  opts.seed = seed;
  auto planted = synthetic::planted_corpus(opts);
  std::vector<std::string> texts;
  for (const auto& r : planted.corpus.reviews) texts.push_back(r.text);
  return {std::move(planted.corpus), embed::encode(texts, embed::EmbeddingBackendConfig{})};
}

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  auto mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid] : (samples[mid - 1] + samples[mid]) / 2.0;
}

std::vector<BenchRow> bench(const BenchOptions& options, const VectorsProvider& provider) {
  if (options.repeats < 1) throw InvalidArgument("bench: repeats must be >= 1");
  options.params.validate();
  std::vector<BenchRow> rows;
  for (auto size : options.pool_sizes) {
    if (size < 2) throw InvalidArgument(fmt::format("bench: pool size {} < 2", size));
    auto input = provider(size, options.seed);
    for (auto method : options.methods) {
      BenchRow row{method, size, 0.0, {}, true};
      std::optional<cluster::ClusteringResult> first;
      for (std::size_t rep = 0; rep < options.repeats; ++rep) {
        auto start = std::chrono::steady_clock::now();
        cluster::ClusteringResult out;
        switch (method) {
          case cluster::Method::kIterative:
            out = cluster::process_reviews(input.pool, input.vectors, options.params);
            break;
          case cluster::Method::kBaseline:
            out = cluster::baseline_result(
                input.pool,
                cluster::baseline_cluster(input.pool, input.vectors, options.params.initial_threshold,
                                          options.params.num_clusters),
                method, options.params.initial_threshold);
            break;
          case cluster::Method::kWordLevel:
            out = cluster::baseline_result(
                input.pool,
                cluster::word_level_baseline(input.pool, input.vectors, cluster::kWordLevelThreshold,
                                             options.params.num_clusters),
                method, cluster::kWordLevelThreshold);
            break;
        }
        row.samples.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        if (!first) {
          first = std::move(out);
        } else if (!(out == *first)) {
          row.outputs_consistent = false;
        }
      }
      row.median_seconds = median(row.samples);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, std::size_t repeats) {
  out << fmt::format(
      "# clustering stage only (similarity matrix + extraction), embedding excluded; "
      "seconds = median of {} runs\n",
      repeats);
  out << "method,pool_size,seconds\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{:.6f}\n", cluster::to_string(r.method), r.pool_size, r.median_seconds);
  }
}

}  // namespace revinsight::report
