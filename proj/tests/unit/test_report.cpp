#include <doctest.h>

#include <sstream>

#include "revinsight/csv.hpp"
#include "revinsight/errors.hpp"
#include "revinsight/report.hpp"
#include "support/helpers.hpp"

using namespace revinsight;
using namespace revinsight::report;

namespace {

cluster::ClusteringResult two_clusters() {
  cluster::ClusteringResult r;
  r.clusters.push_back({"a", "Billing, \"again\"\nsecond line", {"b", "c"}, 2, 0.70, 0});
  r.clusters.push_back({"d", "Waited an hour", {}, 0, 0.69, 1});
  r.residual_ids = {"e"};
  r.pool_size = 5;
  return r;
}

ReviewCorpus pool() {
  ReviewCorpus p;
  for (std::string id : {"a", "b", "c", "d", "e"}) {
    p.reviews.push_back({id, "text of " + id, {}, {}, {}});
  }
  return p;
}

recommend::GenerationRecord ok_record(const std::string& id, int pairs) {
  recommend::GenerationRecord g;
  g.representative_id = id;
  g.prompt = "prompt " + id;
  for (int i = 0; i < pairs; ++i) {
    g.recommendations.push_back({"issue " + std::to_string(i), "advice, with comma"});
  }
  g.raw_response = recommend::render_recommendations(g.recommendations);
  g.parse_failed = pairs == 0;
  g.model_name = "m";
  g.latency_ms = 42.0;
  return g;
}

Timestamp at(const char* iso) { return *parse_timestamp(iso); }

}  // namespace

TEST_CASE("assemble splits successes from failures") {
  auto failed = ok_record("d", 0);
  failed.error = "HTTP 500";
  auto r = assemble_report("run", at("2024-01-02T03:04:05Z"), "prov", two_clusters(),
                           {ok_record("a", 2), failed});
  REQUIRE(r.entries.size() == 1);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].representative_id == "d");
  CHECK_THROWS_AS(assemble_report("run", {}, "", two_clusters(), {ok_record("a", 1)}),
                  InvalidArgument);
  CHECK_THROWS_AS(
      assemble_report("run", {}, "", two_clusters(), {ok_record("a", 1), ok_record("zz", 1)}),
      InvalidArgument);
}

TEST_CASE("json report round-trips and is stable") {
  auto r = assemble_report("run", at("2024-01-02T03:04:05Z"), "prov", two_clusters(),
                           {ok_record("a", 2), ok_record("d", 1)});
  auto text = emit_run_report(r, Format::kJson);
  CHECK(run_report_from_json(nlohmann::json::parse(text)) == r);
  CHECK(emit_run_report(r, Format::kJson) == text);

  auto lean = nlohmann::json::parse(emit_run_report(r, Format::kJson, {.include_timings = false}));
  CHECK_FALSE(lean["clusters"][0]["generation"].contains("latency_ms"));
  CHECK(lean["created_at"] == "2024-01-02T03:04:05Z");
}

TEST_CASE("markdown report has one section per cluster") {
  auto failed = ok_record("d", 0);
  failed.error = "timeout";
  auto r = assemble_report("run", at("2024-01-02T03:04:05Z"), "prov", two_clusters(),
                           {ok_record("a", 2), failed});
  auto md = emit_run_report(r, Format::kMarkdown);
  CHECK(md.find("## Cluster 1 (weight 2, threshold 0.7)") != std::string::npos);
  CHECK(md.find("> Billing, \"again\"\n> second line") != std::string::npos);
  CHECK(md.find("<u>**ISSUE:**</u> issue 1") != std::string::npos);
  CHECK(md.find("## Failures") != std::string::npos);
  CHECK(md.find("- d: timeout") != std::string::npos);
}

TEST_CASE("csv report has one row per recommendation and a blank row otherwise") {
  auto r = assemble_report("run", {}, "", two_clusters(), {ok_record("a", 2), ok_record("d", 0)});
  auto data = emit_run_report(r, Format::kCsv);
  csv::Reader reader(data);
  std::vector<std::vector<std::string>> rows;
  while (auto rec = reader.next()) rows.push_back(rec->fields);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"cluster_index", "representative_id", "weight",
                                            "threshold_used", "issue", "advice"});
  CHECK(rows[1][4] == "issue 0");
  CHECK(rows[1][5] == "advice, with comma");
  CHECK(rows[3] == std::vector<std::string>{"1", "d", "0", "0.69", "", ""});
}

TEST_CASE("annotation sheet lists every clustered review once per cluster") {
  auto sheet = export_annotation_sheet(two_clusters(), pool());
  REQUIRE(sheet.rows.size() == 4);
  CHECK(sheet.rows[0].review_id == "a");
  CHECK(sheet.rows[0].review_text == two_clusters().clusters[0].representative_text);
  CHECK(sheet.rows[1].review_text == "text of b");
  CHECK(sheet.rows[3].cluster_id == 1);
  auto text = to_csv(sheet);
  CHECK(text.rfind(std::string(kAnnotationHeader) + "\n", 0) == 0);
  CHECK(parse_annotation_sheet(text) == sheet);
  CHECK_THROWS_AS(parse_annotation_sheet("id,text\n"), IoError);

  ReviewCorpus partial;
  partial.reviews.push_back({"a", "x", {}, {}, {}});
  CHECK_THROWS_AS(export_annotation_sheet(two_clusters(), partial), InvalidArgument);
}

TEST_CASE("coherence counts primary or secondary topic matches") {
  auto sheet = export_annotation_sheet(two_clusters(), pool());
  sheet.rows[0].primary_topic = "Billing";
  sheet.rows[1].secondary_topic = " billing ";
  sheet.rows[2].primary_topic = "parking";
  sheet.rows[3].primary_topic = "wait";
  auto score = coherence(two_clusters(), sheet, {{0, "billing"}, {1, "wait"}});
  REQUIRE(score.per_cluster.size() == 2);
  CHECK(score.per_cluster[0].matched == 2);
  CHECK(score.per_cluster[0].total == 3);
  CHECK(score.per_cluster[1].fraction == 1.0);
  CHECK_FALSE(score.overall_pass);
  CHECK(coherence(two_clusters(), sheet, {{0, "billing"}, {1, "wait"}}, 0.6).overall_pass);
}

TEST_CASE("coherence names missing rows and unassigned clusters") {
  auto sheet = export_annotation_sheet(two_clusters(), pool());
  sheet.rows.erase(sheet.rows.begin() + 1);
  try {
    coherence(two_clusters(), sheet, {{0, "x"}, {1, "y"}});
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("b (cluster 0)") != std::string::npos);
  }
  CHECK_THROWS_AS(coherence(two_clusters(), export_annotation_sheet(two_clusters(), pool()),
                            {{0, "x"}}),
                  InvalidArgument);
}

TEST_CASE("coherence fixture scores 0.9 and 0.7") {
  auto result = cluster::result_from_json(
      nlohmann::json::parse(helpers::slurp(helpers::fixture("coherence/clusters.json"))));
  auto sheet = parse_annotation_sheet(helpers::slurp(helpers::fixture("coherence/annotated.csv")));
  auto score = coherence(result, sheet, {{0, "billing"}, {1, "wait time"}}, 0.8);
  REQUIRE(score.per_cluster.size() == 2);
  CHECK(score.per_cluster[0].fraction == 0.9);
  CHECK(score.per_cluster[1].fraction == 0.7);
  CHECK_FALSE(score.overall_pass);
}

TEST_CASE("median of samples") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}

TEST_CASE("bench emits one row per size and method") {
  BenchOptions o;
  o.pool_sizes = {40, 80};
  o.repeats = 2;
  auto rows = bench(o);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == cluster::Method::kBaseline);
  CHECK(rows[1].pool_size == 40);
  CHECK(rows[2].pool_size == 80);
  for (const auto& r : rows) {
    CHECK(r.samples.size() == 2);
    CHECK(r.outputs_consistent);
    CHECK(r.median_seconds >= 0.0);
  }
  std::ostringstream out;
  write_bench_csv(out, rows, 2);
  auto text = out.str();
  CHECK(text[0] == '#');
  CHECK(text.find("\nmethod,pool_size,seconds\n") != std::string::npos);
  CHECK(text.find("\nbaseline,40,") != std::string::npos);
  CHECK(text.find("\niterative,80,") != std::string::npos);

  o.repeats = 1;
  o.pool_sizes = {30};
  o.methods = {cluster::Method::kIterative};
  auto single = bench(o);
  REQUIRE(single.size() == 1);
  CHECK(single[0].median_seconds == single[0].samples[0]);
  o.repeats = 0;
  CHECK_THROWS_AS(bench(o), InvalidArgument);
}
