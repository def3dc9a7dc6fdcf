// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "revinsight/cli.hpp"
#include "revinsight/recommend.hpp"
#include "revinsight/report.hpp"
#include "revinsight/simcluster.hpp"
#include "revinsight/synthetic.hpp"
#include "revinsight/text.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"
#include "support/stub_servers.hpp"

using namespace revinsight;
using embed::EmbeddingVector;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(std::string why) {
    if (pass) detail = std::move(why);
    pass = false;
  }
};

struct PlantedPool {
  ReviewCorpus pool;
  std::vector<EmbeddingVector> vectors;
};

PlantedPool planted(std::size_t size, std::size_t topics, std::uint64_t seed) {
  synthetic::PlantedOptions o;
  o.size = size;
  o.topics = topics;
  o.seed = seed;
  auto p = synthetic::planted_corpus(o);
  return {p.corpus, embed::encode(helpers::texts_of(p.corpus), helpers::local_backend())};
}

std::vector<EmbeddingVector> random_vectors(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  // A shared offset makes positive similarities common enough to form clusters.
  std::vector<double> bias(dim);
  for (auto& b : bias) b = g(rng);
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] = bias[d] + 1.2 * g(rng);
        norm += v[d] * v[d];
      }
    } while (norm == 0.0);
    out.emplace_back(v);
  }
  return out;
}

ReviewCorpus numbered_pool(std::size_t n) {
  ReviewCorpus c;
  for (std::size_t i = 0; i < n; ++i) {
    c.reviews.push_back(Review{fmt::format("r{:03}", i), fmt::format("review {}", i), {}, {}, {}});
  }
  return c;
}

cluster::ClusterParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> thr(0.2, 0.95), dec(0.0, 0.03);
  for (;;) {
    cluster::ClusterParams p{thr(rng), (rng() % 5 == 0) ? 0.0 : dec(rng), 1 + rng() % 15};
    if (p.threshold_at(p.num_clusters - 1) > 0.0) return p;
  }
}

// ---- 1 ----------------------------------------------------------------------
Verdict oracle_equivalence() {
  Verdict v;
  std::mt19937_64 rng(2024);
  auto start = std::chrono::steady_clock::now();
  std::size_t total_clusters = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto size = 30 + rng() % 31;
    auto topics = 3 + rng() % 4;
    auto p = planted(size, topics, 1000 + static_cast<std::uint64_t>(trial));

    std::vector<std::vector<double>> raw;
    for (const auto& x : p.vectors) raw.emplace_back(x.values().begin(), x.values().end());
    std::vector<std::string> ids, texts;
    for (const auto& r : p.pool.reviews) {
      ids.push_back(r.id);
      texts.push_back(r.text);
    }
    cluster::ClusterParams params;  // 0.70 / 0.01 / 10
    auto got = cluster::process_reviews(p.pool, p.vectors, params);
    auto want = oracle::cluster(ids, texts, oracle::cosine_matrix(raw), params.initial_threshold,
                                params.threshold_decline, params.num_clusters);
    total_clusters += got.clusters.size();
    if (!(got == want)) v.fail(fmt::format("pool {} (size {}, {} topics) differs", trial, size, topics));
    if (cluster::to_json(got).dump() != cluster::to_json(want).dump()) {
      v.fail(fmt::format("pool {} serializes differently", trial));
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 30.0) v.fail(fmt::format("took {:.2f} s", secs));
  if (v.pass) v.detail = fmt::format("100 pools, {} clusters, all equal, {:.2f} s", total_clusters, secs);
  return v;
}

// ---- 2 ----------------------------------------------------------------------
Verdict threshold_schedule() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto n = 5 + rng() % 40;
    auto vecs = random_vectors(rng, n, 4 + rng() % 12);
    auto params = random_params(rng);
    auto r = cluster::process_reviews(numbered_pool(n), vecs, params);
    for (std::size_t k = 0; k < r.clusters.size(); ++k) {
      double want = params.initial_threshold - static_cast<double>(k) * params.threshold_decline;
      ++checked;
      if (r.clusters[k].iteration != k || std::abs(r.clusters[k].threshold_used - want) > 1e-12) {
        v.fail(fmt::format("trial {} cluster {}: {} vs {}", trial, k, r.clusters[k].threshold_used, want));
      }
    }
  }
  // Twelve orthogonal reviews never merge, so all ten default cycles run.
  std::vector<EmbeddingVector> basis;
  for (std::size_t i = 0; i < 12; ++i) {
    std::vector<double> e(12, 0.0);
    e[i] = 1.0;
    basis.emplace_back(e);
  }
  auto r = cluster::process_reviews(numbered_pool(12), basis, {});
  if (r.clusters.size() != 10) {
    v.fail(fmt::format("default run produced {} clusters", r.clusters.size()));
  } else if (std::abs(r.clusters.back().threshold_used - 0.61) > 1e-12) {
    v.fail(fmt::format("final default threshold {}", r.clusters.back().threshold_used));
  }
  if (v.pass) {
    v.detail = fmt::format("{} clusters within 1e-12; final default threshold {:.12f}", checked,
                           r.clusters.back().threshold_used);
  }
  return v;
}

// ---- 3 ----------------------------------------------------------------------
Verdict partition_invariants() {
  Verdict v;
  std::mt19937_64 rng(31337);
  std::size_t nontrivial = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto n = 1 + rng() % 60;
    auto pool = numbered_pool(n);
    auto vecs = random_vectors(rng, n, 3 + rng() % 14);
    auto r = cluster::process_reviews(pool, vecs, random_params(rng));

    std::multiset<std::string> seen;
    for (const auto& c : r.clusters) {
      seen.insert(c.representative_id);
      seen.insert(c.member_ids.begin(), c.member_ids.end());
      if (c.weight != c.member_ids.size()) v.fail(fmt::format("trial {}: weight mismatch", trial));
      if (c.weight > 0) ++nontrivial;
    }
    seen.insert(r.residual_ids.begin(), r.residual_ids.end());
    std::multiset<std::string> expected;
    for (const auto& rev : pool.reviews) expected.insert(rev.id);
    if (seen != expected) v.fail(fmt::format("trial {}: clusters + residual != pool", trial));
  }
  if (v.pass) v.detail = fmt::format("1000 cases, 0 violations ({} multi-review clusters)", nontrivial);
  return v;
}

// ---- 4 ----------------------------------------------------------------------
Verdict monotonicity() {
  Verdict v;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    auto n = 2 + rng() % 40;
    auto m = cluster::normalize_matrix(cluster::cosine_similarity_matrix(
        random_vectors(rng, n, 3 + rng() % 10)));
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    auto row = rng() % n;
    auto lo = cluster::find_similar(m, row, a);
    auto hi = cluster::find_similar(m, row, b);
    if (!std::includes(lo.begin(), lo.end(), hi.begin(), hi.end())) {
      v.fail(fmt::format("trial {}: set at {} not within set at {}", trial, b, a));
    }
  }

  // Sweep columns on the planted corpus: nonincreasing in threshold, allowing
  // at most one adjacent inversion per decline column.
  auto p = planted(300, 5, 42);
  auto table = cluster::sweep(p.pool, p.vectors);
  const auto& opts = cluster::SweepOptions{};
  std::string columns;
  for (std::size_t d = 0; d < opts.declines.size(); ++d) {
    std::vector<double> col;
    for (std::size_t t = 0; t < opts.thresholds.size(); ++t) {
      const auto& cell = table.cells[t * opts.declines.size() + d];
      col.push_back(cell.avg_cluster_size.value_or(NAN));
    }
    int inversions = 0;
    for (std::size_t t = 1; t < col.size(); ++t) {
      if (!(col[t] <= col[t - 1])) ++inversions;
    }
    if (inversions > 1) v.fail(fmt::format("decline {} column has {} inversions", opts.declines[d], inversions));
    columns += fmt::format(" {}:[{:.1f}]", opts.declines[d], fmt::join(col, ","));
  }
  if (v.pass) v.detail = "1000 matrices, 0 violations; columns" + columns;
  return v;
}

// ---- 5 ----------------------------------------------------------------------
Verdict sweep_format() {
  Verdict v;
  auto render = [] {
    auto p = planted(300, 5, 42);
    std::ostringstream out;
    cluster::write_sweep_csv(out, cluster::sweep(p.pool, p.vectors));
    return out.str();
  };
  auto a = render();
  auto b = render();
  if (a != b) v.fail("two runs differ");
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  if (line != "threshold,decline_rate,avg_cluster_size_top3") v.fail("header is '" + line + "'");
  const double thresholds[] = {0.68, 0.69, 0.70, 0.71, 0.72};
  const double declines[] = {0.0, 0.005, 0.01, 0.015, 0.02};
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string t, d, s;
    std::getline(fields, t, ',');
    std::getline(fields, d, ',');
    std::getline(fields, s, ',');
    if (rows < 25 && (std::stod(t) != thresholds[rows / 5] || std::stod(d) != declines[rows % 5])) {
      v.fail(fmt::format("row {} is ({}, {})", rows, t, d));
    }
    if (s.empty() || s == "error") v.fail(fmt::format("row {} has no size", rows));
    ++rows;
  }
  if (rows != 25) v.fail(fmt::format("{} data rows", rows));
  if (v.pass) v.detail = fmt::format("25 cells, byte-identical across runs ({} bytes)", a.size());
  return v;
}

// ---- 6 ----------------------------------------------------------------------
Verdict parser() {
  Verdict v;
  const std::size_t expected[] = {0, 0, 0, 2, 2};
  std::string counts;
  for (int i = 0; i < 5; ++i) {
    auto raw = helpers::slurp(helpers::fixture(fmt::format("responses/response_{}.txt", i + 1)));
    auto recs = recommend::parse_recommendations(raw);
    counts += fmt::format("{}{}", i ? "," : "", recs.size());
    if (recs.size() != expected[i]) v.fail(fmt::format("response {} gave {} pairs", i + 1, recs.size()));
    for (const auto& r : recs) {
      if (r.issue.empty() || r.advice.empty()) v.fail(fmt::format("response {} has an empty field", i + 1));
    }
  }
  std::mt19937_64 rng(606);
  const std::vector<std::string> words = {"quote", "was", "wrong", "call", "the", "patient", "within",
                                          "one", "day", "x-ray", "50%", "it's", "(today)", "ok.",
                                          "\xC3\xA9t\xC3\xA9", "staff", "verify", "insurance"};
  auto phrase = [&] {
    std::string s;
    for (auto n = 1 + rng() % 15; n > 0; --n) s += (s.empty() ? "" : " ") + words[rng() % words.size()];
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    std::vector<recommend::Recommendation> recs(rng() % 6);
    for (auto& r : recs) r = {phrase(), phrase()};
    if (recommend::parse_recommendations(recommend::render_recommendations(recs)) != recs) {
      v.fail(fmt::format("round trip {} differs", i));
    }
  }
  if (v.pass) v.detail = fmt::format("fixture pair counts [{}]; 1000 round trips equal", counts);
  return v;
}

// ---- 7 ----------------------------------------------------------------------
Verdict budget() {
  Verdict v;
  std::mt19937_64 rng(707);
  const std::vector<std::string> pieces = {"word", " ", "  ", "\n", "caf\xC3\xA9", "\xE2\x80\x94",
                                           "\xF0\x9F\x98\x80", "longerwordwithoutbreaks", ",", "."};
  auto tmpl = recommend::PromptTemplate::default_template();
  recommend::PromptBudget b;  // 2048 tokens at 4 chars/token
  const auto ceiling = b.char_limit() + text::utf8_length(recommend::kTruncationMarker);
  int under = 0, over = 0;
  for (int i = 0; i < 500; ++i) {
    std::string review = "Complaint";
    auto target = rng() % 16000;
    while (text::utf8_length(review) < target) review += pieces[rng() % pieces.size()];
    auto prompt = recommend::build_prompt(review, tmpl, b);
    if (text::utf8_length(prompt) > ceiling) {
      v.fail(fmt::format("text {}: {} chars > {}", i, text::utf8_length(prompt), ceiling));
    }
    auto full = tmpl.render(review);
    if (b.estimate_tokens(full) <= b.max_input_tokens) {
      ++under;
      if (prompt != full) v.fail(fmt::format("text {} was under budget but changed", i));
    } else {
      ++over;
    }
  }
  if (v.pass) v.detail = fmt::format("500 texts ({} under, {} over budget), ceiling {} chars", under, over, ceiling);
  return v;
}

// ---- 8 ----------------------------------------------------------------------
int cli(std::vector<std::string> args, std::string* err = nullptr) {
  std::ostringstream o, e;
  int code = cli::run_cli(args, o, e);
  if (err) *err = e.str();
  return code;
}

Verdict determinism() {
  Verdict v;
  stub::ChatServer server;
  helpers::TempDir dir("acc-determinism");
  auto csv = (dir / "reviews.csv").string();
  if (cli({"synth", "--output", csv, "--size", "300", "--seed", "42", "--timestamps",
           "--positive-fraction", "0.2"}) != 0) {
    v.fail("synth failed");
    return v;
  }
  helpers::spit(dir / "run.conf", "input = " + csv + "\n"
                                  "id_column = id\nrating_column = rating\ntimestamp_column = timestamp\n"
                                  "source_column = source\nembed_backend = local-test\nseed = 42\n"
                                  "threshold = 0.6\n"
                                  "chat_endpoint = " + server.endpoint() + "\n"
                                  "created_at = 2025-01-01T00:00:00Z\n");
  std::string a_clusters, a_report;
  for (int round = 0; round < 2; ++round) {
    auto out = dir / fmt::format("out{}", round);
    std::string err;
    if (int code = cli({"run", "--config", (dir / "run.conf").string(), "--output-dir", out.string()}, &err); code != 0) {
      v.fail(fmt::format("run {} exited {}: {}", round, code, err));
      return v;
    }
    auto clusters = helpers::slurp(out / "clusters.json");
    auto report = helpers::slurp(out / "report.json");
    if (round == 0) {
      a_clusters = clusters;
      a_report = report;
    } else {
      if (clusters != a_clusters) v.fail("clusters.json differs");
      if (report != a_report) v.fail("report.json differs");
    }
  }
  if (v.pass) {
    auto n = nlohmann::json::parse(a_report)["clusters"].size();
    v.detail = fmt::format("two runs identical ({} bytes clusters.json, {} bytes report.json, {} clusters)",
                           a_clusters.size(), a_report.size(), n);
  }
  return v;
}

// ---- 9 ----------------------------------------------------------------------
Verdict failure_isolation() {
  Verdict v;
  const std::string marker = "POISONED-REQUEST";
  stub::ChatServer server({.fail_marker = marker});

  cluster::ClusteringResult result;
  const int n = 7;
  for (int i = 0; i < n; ++i) {
    std::string text = fmt::format("The receptionist lost form {} and nobody called back.", i);
    if (i == 3) text += " " + marker;
    result.clusters.push_back({fmt::format("rep{}", i), text, {}, 0, 0.70 - 0.01 * i,
                               static_cast<std::size_t>(i)});
  }
  result.pool_size = n;

  recommend::ChatClientConfig client;
  client.endpoint = server.endpoint();
  client.request.retry.max_retries = 1;
  client.request.retry.initial_backoff = std::chrono::milliseconds{1};
  auto records = recommend::recommend_all(result, recommend::PromptTemplate::default_template(), {}, client);
  int ok = 0, failed = 0;
  for (int i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    if (r.representative_id != fmt::format("rep{}", i)) v.fail("records out of order");
    if (r.failed()) {
      ++failed;
      if (i != 3) v.fail(fmt::format("record {} failed", i));
    } else {
      ++ok;
    }
  }
  if (ok != n - 1 || failed != 1) v.fail(fmt::format("{} ok, {} failed", ok, failed));

  // Same through the CLI: exit 0 and the failure lands in the report.
  helpers::TempDir dir("acc-isolation");
  helpers::spit(dir / "clusters.json", cluster::to_json(result).dump(2));
  std::string err;
  int code = cli({"recommend", "--clusters-file", (dir / "clusters.json").string(), "--output-dir",
                  (dir / "out").string(), "--chat-endpoint", server.endpoint(), "--chat-retries", "1",
                  "--retry-backoff-ms", "1"},
                 &err);
  if (code != 0) {
    v.fail(fmt::format("cli exited {}: {}", code, err));
  } else {
    auto report = nlohmann::json::parse(helpers::slurp(dir / "out" / "report.json"));
    if (report["clusters"].size() != n - 1 || report["failures"].size() != 1) {
      v.fail("report does not hold N-1 entries and one failure");
    }
  }
  if (v.pass) v.detail = fmt::format("{} of {} succeeded in order, 1 failure recorded, exit 0", ok, n);
  return v;
}

// ---- 10 ---------------------------------------------------------------------
Verdict performance() {
  Verdict v;
  report::BenchOptions o;  // sizes {100, 300}, methods {baseline, iterative}, 5 repeats
  auto rows = report::bench(o);
  std::ostringstream out;
  report::write_bench_csv(out, rows, o.repeats);
  auto csv = out.str();

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line.empty() || line[0] != '#') v.fail("missing comment line");
  std::getline(in, line);
  if (line != "method,pool_size,seconds") v.fail("header is '" + line + "'");
  std::set<std::pair<std::string, std::string>> cells;
  while (std::getline(in, line)) {
    auto c1 = line.find(','), c2 = line.rfind(',');
    cells.insert({line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1)});
  }
  std::set<std::pair<std::string, std::string>> want{
      {"baseline", "100"}, {"baseline", "300"}, {"iterative", "100"}, {"iterative", "300"}};
  if (cells != want) v.fail("bench rows are not sizes {100,300} x {baseline,iterative}");

  double iterative300 = -1.0;
  for (const auto& r : rows) {
    if (!r.outputs_consistent) v.fail("repeated runs disagreed");
    if (r.method == cluster::Method::kIterative && r.pool_size == 300) iterative300 = r.median_seconds;
  }
  if (!(iterative300 >= 0.0 && iterative300 < 1.0)) v.fail(fmt::format("300-review median {} s", iterative300));
  if (v.pass) {
    std::string summary;
    for (const auto& r : rows) {
      summary += fmt::format(" {}/{}={:.4f}s", cluster::to_string(r.method), r.pool_size, r.median_seconds);
    }
    v.detail = "medians" + summary;
  }
  return v;
}

// ---- 11 ---------------------------------------------------------------------
Verdict coherence_metric() {
  Verdict v;
  auto result = cluster::result_from_json(
      nlohmann::json::parse(helpers::slurp(helpers::fixture("coherence/clusters.json"))));
  auto sheet = report::parse_annotation_sheet(helpers::slurp(helpers::fixture("coherence/annotated.csv")));
  auto score = report::coherence(result, sheet, {{0, "billing"}, {1, "wait time"}}, 0.8);
  if (score.per_cluster.size() != 2) {
    v.fail("expected two clusters");
    return v;
  }
  if (score.per_cluster[0].fraction != 0.9) v.fail(fmt::format("cluster 0 fraction {}", score.per_cluster[0].fraction));
  if (score.per_cluster[1].fraction != 0.7) v.fail(fmt::format("cluster 1 fraction {}", score.per_cluster[1].fraction));
  if (score.overall_pass) v.fail("overall_pass should be false");
  if (v.pass) v.detail = "fractions 0.9 and 0.7, overall_pass false at 0.8";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"threshold schedule", threshold_schedule},
      {"partition invariants", partition_invariants},
      {"find_similar monotonicity", monotonicity},
      {"sweep format", sweep_format},
      {"ISSUE/ADVICE parser", parser},
      {"prompt budget", budget},
      {"end-to-end determinism", determinism},
      {"failure isolation", failure_isolation},
      {"performance sanity", performance},
      {"coherence metric", coherence_metric},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("threw: ") + e.what());
    }
    if (!v.pass) ++failures;
    std::cout << fmt::format("{} {:>2}. {}: {}", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             v.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
