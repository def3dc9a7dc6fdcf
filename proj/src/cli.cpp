#include "revinsight/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "revinsight/config.hpp"
#include "revinsight/csv.hpp"
#include "revinsight/embed.hpp"
#include "revinsight/errors.hpp"
#include "revinsight/http.hpp"
#include "revinsight/ingest.hpp"
#include "revinsight/recommend.hpp"
#include "revinsight/report.hpp"
#include "revinsight/simcluster.hpp"
#include "revinsight/synthetic.hpp"
#include "revinsight/text.hpp"

namespace revinsight::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stable artifact names under the output directory.
constexpr std::string_view kCorpusFile = "corpus.jsonl";
constexpr std::string_view kProvenanceFile = "corpus.provenance.txt";
constexpr std::string_view kClustersFile = "clusters.json";
constexpr std::string_view kSweepFile = "sweep.csv";
constexpr std::string_view kGenerationsFile = "generations.jsonl";
constexpr std::string_view kBenchFile = "bench.csv";
constexpr std::string_view kAnnotationFile = "annotation.csv";
constexpr std::string_view kEffectiveConfigFile = "config.effective";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("cannot read '{}'", path.string()));
  return buf.str();
}

// Write-then-rename so a killed run never leaves a half-written artifact that
// --resume would mistake for a finished stage.
void write_file(const fs::path& path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
}

std::vector<double> parse_double_list(std::string_view flag, const std::string& raw) {
  std::vector<double> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = std::string(text::trim(item));
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("{}: '{}' is not a number", flag, t));
    }
  }
  if (out.empty()) throw ConfigError(fmt::format("{} needs at least one value", flag));
  return out;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// Options shared by every subcommand: --config plus one flag per config key.
struct Common {
  std::string config_path;
  std::map<std::string, std::string, std::less<>> values;
  std::vector<std::pair<std::string_view, CLI::Option*>> options;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    for (auto key : config_keys()) {
      std::string flag = "--" + std::string(key);
      std::replace(flag.begin(), flag.end(), '_', '-');
      auto* opt = sub->add_option(flag, values[std::string(key)])->group("Configuration");
      options.emplace_back(key, opt);
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) apply_setting(config, key, values.find(key)->second);
    }
    validate(config);
    return config;
  }
};

struct Context {
  PipelineConfig config;
  std::ostream& out;
  std::ostream& err;

  fs::path artifact(std::string_view name) const { return fs::path(config.output_dir) / name; }

  void echo_config() const { write_file(artifact(kEffectiveConfigFile), to_text(config)); }
};

// ---- ingest -----------------------------------------------------------------

ReviewCorpus ingest_corpus(const PipelineConfig& c) {
  if (c.input.empty()) throw ConfigError("no input file configured (set 'input' or --input)");
  if (!fs::exists(c.input)) throw IoError(fmt::format("input file '{}' does not exist", c.input));

  ingest::LoadOptions load;
  load.columns = c.columns;
  load.lenient = c.lenient;
  auto corpus = ingest::load_reviews(c.input, load);
  corpus = ingest::filter_by_rating(corpus, c.exclude_ratings);
  if (c.language_filter) {
    corpus = ingest::filter_language(corpus, c.language, ingest::StopwordDetector{},
                                     c.language_confidence);
  }
  corpus = ingest::select_latest(corpus, c.latest);
  if (c.redact_pii) corpus = ingest::redact_pii(corpus);
  return corpus;
}

void cmd_ingest(const Context& ctx) {
  auto corpus = ingest_corpus(ctx.config);
  std::ostringstream jsonl;
  write_jsonl(jsonl, corpus);
  write_file(ctx.artifact(kCorpusFile), jsonl.str());
  write_file(ctx.artifact(kProvenanceFile), corpus.provenance + "\n");
  ctx.out << corpus.provenance << "\n";
  ctx.out << fmt::format("wrote {} reviews to {}\n", corpus.size(),
                         ctx.artifact(kCorpusFile).string());
}

ReviewCorpus read_corpus(const fs::path& path) {
  std::istringstream in(read_file(path));
  fs::path prov = path;
  prov.replace_extension(".provenance.txt");
  std::string provenance = fs::exists(prov) ? std::string(text::trim(read_file(prov)))
                                            : fmt::format("read from {}", path.string());
  return read_jsonl(in, provenance);
}

// ---- cluster ----------------------------------------------------------------

std::vector<embed::EmbeddingVector> embed_pool(const Context& ctx, const ReviewCorpus& pool) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& r : pool.reviews) texts.push_back(r.text);
  embed::EncodeStats stats;
  auto vectors = embed::encode(texts, ctx.config.embedding, &stats);
  if (!stats.degenerate.empty()) {
    ctx.err << fmt::format("warning: {} review(s) produced zero-norm embeddings\n",
                           stats.degenerate.size());
  }
  return vectors;
}

cluster::ClusteringResult cluster_pool(const Context& ctx, const ReviewCorpus& pool,
                                       cluster::Method method) {
  const auto& p = ctx.config.cluster_params;
  if (pool.empty()) {
    cluster::ClusteringResult empty;
    empty.method = method;
    empty.params = p;
    return empty;
  }
  auto vectors = embed_pool(ctx, pool);
  switch (method) {
    case cluster::Method::kIterative:
      return cluster::process_reviews(pool, vectors, p);
    case cluster::Method::kBaseline:
      return cluster::baseline_result(
          pool, cluster::baseline_cluster(pool, vectors, p.initial_threshold, p.num_clusters),
          method, p.initial_threshold);
    case cluster::Method::kWordLevel:
      return cluster::baseline_result(
          pool,
          cluster::word_level_baseline(pool, vectors, cluster::kWordLevelThreshold, p.num_clusters),
          method, cluster::kWordLevelThreshold);
  }
  throw InvalidArgument("unknown clustering method");
}

void print_clusters(std::ostream& out, const cluster::ClusteringResult& r) {
  out << fmt::format("{} cluster(s) from {} reviews ({}), {} unclustered\n", r.clusters.size(),
                     r.pool_size, cluster::to_string(r.method), r.residual_ids.size());
  for (std::size_t i = 0; i < r.clusters.size(); ++i) {
    const auto& c = r.clusters[i];
    out << fmt::format("  #{} {} weight={} threshold={}\n", i, c.representative_id, c.weight,
                       c.threshold_used);
  }
}

void cmd_cluster(const Context& ctx, const fs::path& corpus_path, cluster::Method method) {
  auto pool = read_corpus(corpus_path);
  auto result = cluster_pool(ctx, pool, method);
  write_file(ctx.artifact(kClustersFile), cluster::to_json(result).dump(2) + "\n");
  print_clusters(ctx.out, result);
}

// ---- sweep ------------------------------------------------------------------

void cmd_sweep(const Context& ctx, const fs::path& corpus_path, cluster::SweepOptions options) {
  auto pool = read_corpus(corpus_path);
  if (pool.empty()) throw ConfigError("cannot sweep an empty corpus");
  auto vectors = embed_pool(ctx, pool);
  options.num_clusters = ctx.config.cluster_params.num_clusters;
  auto table = cluster::sweep(pool, vectors, options);
  std::ostringstream csv_out;
  cluster::write_sweep_csv(csv_out, table);
  write_file(ctx.artifact(kSweepFile), csv_out.str());
  ctx.out << csv_out.str();
}

// ---- recommend --------------------------------------------------------------

recommend::PromptTemplate load_template(const PipelineConfig& c) {
  if (c.template_path.empty()) return recommend::PromptTemplate::default_template();
  if (!fs::exists(c.template_path)) {
    throw IoError(fmt::format("template file '{}' does not exist", c.template_path));
  }
  return recommend::PromptTemplate::from_file(c.template_path);
}

Timestamp resolve_created_at(const PipelineConfig& c) {
  if (!c.created_at.empty()) return *parse_timestamp(c.created_at);
  if (auto epoch = http::env_value("SOURCE_DATE_EPOCH")) {
    if (auto ts = parse_timestamp(*epoch)) return *ts;
    throw ConfigError(fmt::format("SOURCE_DATE_EPOCH '{}' is not an epoch timestamp", *epoch));
  }
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::map<std::string, recommend::GenerationRecord> read_generations(const fs::path& path) {
  std::map<std::string, recommend::GenerationRecord> out;
  if (!fs::exists(path)) return out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = recommend::record_from_json(json::parse(line));
      auto id = rec.representative_id;
      out.insert_or_assign(std::move(id), std::move(rec));  // later lines win
    } catch (const std::exception& e) {
      // A torn last line from an interrupted run is expected; anything else is not.
      if (in.peek() != EOF) {
        throw IoError(fmt::format("{}: line {}: {}", path.string(), line_no, e.what()));
      }
    }
  }
  return out;
}

void cmd_recommend(const Context& ctx, const fs::path& clusters_path, bool dry_run, bool resume) {
  const auto& c = ctx.config;
  auto clusters_text = read_file(clusters_path);
  cluster::ClusteringResult result;
  try {
    result = cluster::result_from_json(json::parse(clusters_text));
  } catch (const json::exception& e) {
    throw IoError(fmt::format("{}: {}", clusters_path.string(), e.what()));
  }
  auto tmpl = load_template(c);

  if (dry_run) {
    for (std::size_t i = 0; i < result.clusters.size(); ++i) {
      const auto& cl = result.clusters[i];
      ctx.out << fmt::format("----- cluster {} ({}) -----\n", i, cl.representative_id);
      ctx.out << recommend::build_prompt(cl.representative_text, tmpl, c.budget) << "\n";
    }
    return;
  }

  c.chat.validate();
  if (!c.chat.api_key_env.empty() && !http::env_value(c.chat.api_key_env)) {
    throw ConfigError(
        fmt::format("environment variable {} (chat API key) is not set", c.chat.api_key_env));
  }

  std::string provenance;
  if (auto prov = ctx.artifact(kProvenanceFile); fs::exists(prov)) {
    provenance = std::string(text::trim(read_file(prov)));
  }
  std::string template_text = c.template_path.empty() ? std::string() : read_file(c.template_path);
  auto run_id = fmt::format(
      "{:016x}", text::fnv1a64(fmt::format("{}\n{}\n{}\n{}", clusters_text, c.chat.model_name,
                                           template_text, c.seed)));

  std::vector<recommend::GenerationRecord> records;
  if (!result.clusters.empty()) {
    auto log_path = ctx.artifact(kGenerationsFile);
    recommend::RecommendOptions options;
    if (resume) options.completed = read_generations(log_path);
    fs::create_directories(c.output_dir);
    // Rewritten from the parsed records so a torn last line cannot swallow
    // the next append.
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw IoError(fmt::format("cannot write '{}'", log_path.string()));
    for (const auto& [id, rec] : options.completed) log << recommend::to_json(rec).dump() << "\n";
    log.flush();
    std::size_t done = 0;
    options.on_record = [&](const recommend::GenerationRecord& rec) {
      log << recommend::to_json(rec).dump() << "\n";
      log.flush();
      ++done;
      ctx.err << fmt::format("[{}/{}] {} {}\n", done, result.clusters.size(),
                             rec.representative_id, rec.failed() ? "FAILED" : "ok");
    };
    records = recommend::recommend_all(result, tmpl, c.budget, c.chat, options);
  }

  auto report = report::assemble_report(run_id, resolve_created_at(c), provenance, result, records);
  report::EmitOptions emit{.include_timings = false};
  write_file(ctx.artifact("report.json"), report::emit_run_report(report, report::Format::kJson, emit));
  write_file(ctx.artifact("report.md"),
             report::emit_run_report(report, report::Format::kMarkdown, emit));
  write_file(ctx.artifact("report.csv"), report::emit_run_report(report, report::Format::kCsv, emit));
  ctx.out << fmt::format("{} of {} cluster(s) have recommendations; {} failed\n",
                         report.entries.size(), result.clusters.size(), report.failures.size());
  for (const auto& f : report.failures) {
    ctx.out << fmt::format("  failed {}: {}\n", f.representative_id, f.error);
  }
}

// ---- run --------------------------------------------------------------------

void cmd_run(const Context& ctx, cluster::Method method, bool resume) {
  auto corpus_path = ctx.artifact(kCorpusFile);
  if (resume && fs::exists(corpus_path)) {
    ctx.out << fmt::format("ingest: reusing {}\n", corpus_path.string());
  } else {
    cmd_ingest(ctx);
  }
  auto clusters_path = ctx.artifact(kClustersFile);
  if (resume && fs::exists(clusters_path)) {
    ctx.out << fmt::format("cluster: reusing {}\n", clusters_path.string());
  } else {
    cmd_cluster(ctx, corpus_path, method);
  }
  cmd_recommend(ctx, clusters_path, false, resume);
}

// ---- bench ------------------------------------------------------------------

void cmd_bench(const Context& ctx, const std::string& sizes, const std::string& methods,
               std::size_t repeats) {
  report::BenchOptions options;
  options.pool_sizes.clear();
  for (const auto& s : split_list(sizes)) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0) {
      throw ConfigError(fmt::format("--sizes: '{}' is not a positive integer", s));
    }
    options.pool_sizes.push_back(n);
  }
  options.methods.clear();
  for (const auto& m : split_list(methods)) options.methods.push_back(cluster::method_from_string(m));
  if (options.pool_sizes.empty()) throw ConfigError("--sizes needs at least one value");
  if (options.methods.empty()) throw ConfigError("--methods needs at least one value");
  if (repeats < 1) throw ConfigError("--repeat must be >= 1");
  options.repeats = repeats;
  options.seed = ctx.config.seed;
  options.params = ctx.config.cluster_params;

  auto rows = report::bench(options);
  std::ostringstream csv_out;
  report::write_bench_csv(csv_out, rows, repeats);
  write_file(ctx.artifact(kBenchFile), csv_out.str());
  ctx.out << csv_out.str();
}

// ---- annotate / coherence ---------------------------------------------------

void cmd_annotate(const Context& ctx, const fs::path& clusters_path, const fs::path& corpus_path) {
  auto result = cluster::result_from_json(json::parse(read_file(clusters_path)));
  auto pool = read_corpus(corpus_path);
  auto sheet = report::export_annotation_sheet(result, pool);
  write_file(ctx.artifact(kAnnotationFile), report::to_csv(sheet));
  ctx.out << fmt::format("wrote {} rows to {}\n", sheet.rows.size(),
                         ctx.artifact(kAnnotationFile).string());
}

std::map<std::size_t, std::string> read_cluster_topics(const fs::path& path) {
  auto data = read_file(path);
  csv::Reader reader(data);
  std::map<std::size_t, std::string> topics;
  bool header = true;
  while (auto rec = reader.next()) {
    if (!rec->ok()) {
      throw IoError(fmt::format("{}: line {}: {}", path.string(), rec->line, rec->error));
    }
    if (header) {
      header = false;
      continue;
    }
    if (rec->fields.size() != 2) {
      throw IoError(fmt::format("{}: line {}: expected cluster_id,topic", path.string(), rec->line));
    }
    std::size_t id = 0;
    const auto& f = rec->fields[0];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      throw IoError(fmt::format("{}: line {}: bad cluster id '{}'", path.string(), rec->line, f));
    }
    topics[id] = rec->fields[1];
  }
  return topics;
}

int cmd_coherence(const Context& ctx, const fs::path& clusters_path, const fs::path& sheet_path,
                  const fs::path& topics_path, double pass_threshold) {
  auto result = cluster::result_from_json(json::parse(read_file(clusters_path)));
  auto sheet = report::parse_annotation_sheet(read_file(sheet_path));
  auto score = report::coherence(result, sheet, read_cluster_topics(topics_path), pass_threshold);
  ctx.out << "cluster_id,matched,total,fraction\n";
  for (const auto& c : score.per_cluster) {
    ctx.out << fmt::format("{},{},{},{}\n", c.cluster_id, c.matched, c.total, c.fraction);
  }
  ctx.out << fmt::format("overall: {} (threshold {})\n", score.overall_pass ? "pass" : "fail",
                         pass_threshold);
  return 0;
}

// ---- synth ------------------------------------------------------------------

void cmd_synth(const PipelineConfig& config, synthetic::PlantedOptions options,
               const std::string& output, std::ostream& out) {
  options.seed = config.seed;
  auto planted = synthetic::planted_corpus(options);
  std::ostringstream csv_out;
  synthetic::write_csv(csv_out, planted);
  if (output.empty() || output == "-") {
    out << csv_out.str();
  } else {
    write_file(output, csv_out.str());
  }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster customer reviews into recurring issues and draft advice for each."};
  app.name("revinsight");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::list<Common> commons;
  auto make = [&](const char* name, const char* description) {
    auto* sub = app.add_subcommand(name, description);
    commons.emplace_back().attach(sub);
    return std::pair{sub, &commons.back()};
  };

  std::string corpus_flag, clusters_flag;
  bool baseline = false, dry_run = false, resume = false;
  std::string method_name = "iterative";

  auto [ingest_cmd, ingest_common] = make("ingest", "Load, filter and sample reviews into corpus.jsonl");

  auto [cluster_cmd, cluster_common] = make("cluster", "Embed the corpus and extract clusters");
  cluster_cmd->add_option("--corpus", corpus_flag, "Corpus file (default <output-dir>/corpus.jsonl)");
  cluster_cmd->add_flag("--baseline", baseline, "Single pass, no deletion, no decline");
  cluster_cmd->add_option("--method", method_name, "iterative, baseline or word_level");

  std::string thresholds_flag = "0.68,0.69,0.70,0.71,0.72";
  std::string declines_flag = "0,0.005,0.01,0.015,0.02";
  std::size_t top_m = 3;
  std::string size_incl_rep = "true";
  auto [sweep_cmd, sweep_common] = make("sweep", "Average top cluster size over a threshold/decline grid");
  sweep_cmd->add_option("--corpus", corpus_flag, "Corpus file (default <output-dir>/corpus.jsonl)");
  sweep_cmd->add_option("--thresholds", thresholds_flag, "Comma-separated initial thresholds");
  sweep_cmd->add_option("--declines", declines_flag, "Comma-separated decline rates");
  sweep_cmd->add_option("--top-m", top_m, "Number of leading clusters averaged")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--size-includes-representative", size_incl_rep,
                        "Count the representative in cluster size (true/false)");

  auto [rec_cmd, rec_common] = make("recommend", "Ask the chat model for advice on each cluster");
  rec_cmd->add_option("--clusters-file", clusters_flag, "Clusters file (default <output-dir>/clusters.json)");
  rec_cmd->add_flag("--dry-run", dry_run, "Print prompts without calling the endpoint");
  rec_cmd->add_flag("--resume", resume, "Reuse successful records from generations.jsonl");

  auto [run_cmd, run_common] = make("run", "ingest, cluster and recommend in one go");
  run_cmd->add_flag("--resume", resume, "Skip stages whose artifacts already exist");
  run_cmd->add_flag("--baseline", baseline, "Use the single-pass baseline for clustering");

  std::string sizes_flag = "100,300", methods_flag = "baseline,iterative";
  std::size_t repeats = 5;
  auto [bench_cmd, bench_common] = make("bench", "Time the clustering stage on planted corpora");
  bench_cmd->add_option("--sizes", sizes_flag, "Comma-separated pool sizes");
  bench_cmd->add_option("--methods", methods_flag, "Comma-separated methods");
  bench_cmd->add_option("--repeat", repeats, "Repetitions per cell (median reported)");

  auto [annotate_cmd, annotate_common] = make("annotate", "Export a blank topic annotation sheet");
  annotate_cmd->add_option("--clusters-file", clusters_flag, "Clusters file");
  annotate_cmd->add_option("--corpus", corpus_flag, "Corpus file");

  std::string sheet_flag, topics_flag;
  double pass_threshold = 0.8;
  auto [coh_cmd, coh_common] = make("coherence", "Score an annotated sheet against cluster topics");
  coh_cmd->add_option("--clusters-file", clusters_flag, "Clusters file");
  coh_cmd->add_option("--annotations", sheet_flag, "Annotated sheet")->required();
  coh_cmd->add_option("--topics", topics_flag, "CSV of cluster_id,topic")->required();
  coh_cmd->add_option("--pass-threshold", pass_threshold, "Per-cluster fraction required to pass");

  synthetic::PlantedOptions planted;
  std::string synth_output;
  auto [synth_cmd, synth_common] = make("synth", "Write a seeded planted-topic review CSV");
  synth_cmd->group("");  // tooling for tests and benchmarks, hidden from help
  synth_cmd->add_option("--size", planted.size, "Number of reviews");
  synth_cmd->add_option("--topics", planted.topics, "Planted topics");
  synth_cmd->add_option("--noise", planted.noise_fraction, "Share of off-topic reviews");
  synth_cmd->add_option("--positive-fraction", planted.positive_fraction, "Share rated 4 or 5");
  synth_cmd->add_flag("--timestamps", planted.timestamps, "Emit timestamps");
  synth_cmd->add_option("--output", synth_output, "Output CSV path ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  auto context_for = [&](const Common* common) { return Context{common->resolve(), out, err}; };
  auto or_default = [](const std::string& flag, const Context& ctx, std::string_view name) {
    return flag.empty() ? ctx.artifact(name) : fs::path(flag);
  };
  auto chosen_method = [&]() {
    return baseline ? cluster::Method::kBaseline : cluster::method_from_string(method_name);
  };

  if (ingest_cmd->parsed()) {
    auto ctx = context_for(ingest_common);
    ctx.echo_config();
    cmd_ingest(ctx);
  } else if (cluster_cmd->parsed()) {
    auto ctx = context_for(cluster_common);
    auto method = chosen_method();
    ctx.echo_config();
    cmd_cluster(ctx, or_default(corpus_flag, ctx, kCorpusFile), method);
  } else if (sweep_cmd->parsed()) {
    auto ctx = context_for(sweep_common);
    cluster::SweepOptions options;
    options.thresholds = parse_double_list("--thresholds", thresholds_flag);
    options.declines = parse_double_list("--declines", declines_flag);
    options.top_m = top_m;
    PipelineConfig scratch;
    apply_setting(scratch, "lenient", size_incl_rep);  // reuse the boolean parser
    options.size_includes_representative = scratch.lenient;
    ctx.echo_config();
    cmd_sweep(ctx, or_default(corpus_flag, ctx, kCorpusFile), std::move(options));
  } else if (rec_cmd->parsed()) {
    auto ctx = context_for(rec_common);
    ctx.echo_config();
    cmd_recommend(ctx, or_default(clusters_flag, ctx, kClustersFile), dry_run, resume);
  } else if (run_cmd->parsed()) {
    auto ctx = context_for(run_common);
    ctx.echo_config();
    cmd_run(ctx, baseline ? cluster::Method::kBaseline : cluster::Method::kIterative, resume);
  } else if (bench_cmd->parsed()) {
    auto ctx = context_for(bench_common);
    ctx.echo_config();
    cmd_bench(ctx, sizes_flag, methods_flag, repeats);
  } else if (annotate_cmd->parsed()) {
    auto ctx = context_for(annotate_common);
    ctx.echo_config();
    cmd_annotate(ctx, or_default(clusters_flag, ctx, kClustersFile),
                 or_default(corpus_flag, ctx, kCorpusFile));
  } else if (coh_cmd->parsed()) {
    auto ctx = context_for(coh_common);
    return cmd_coherence(ctx, or_default(clusters_flag, ctx, kClustersFile), sheet_flag,
                         topics_flag, pass_threshold);
  } else if (synth_cmd->parsed()) {
    cmd_synth(synth_common->resolve(), planted, synth_output, out);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfig);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace revinsight::cli
