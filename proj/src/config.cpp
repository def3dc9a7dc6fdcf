#include "revinsight/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "revinsight/errors.hpp"
#include "revinsight/text.hpp"

namespace revinsight {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError(fmt::format("config key '{}': '{}' is not {}", key, value, want));
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    std::string s(text::trim(v));
    double d = std::stod(s, &used);
    if (used != s.size()) bad_value(key, v, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a number");
  }
}

template <typename T>
T to_unsigned(std::string_view key, std::string_view raw) {
  auto v = text::trim(raw);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    bad_value(key, raw, "a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view raw) {
  auto v = text::to_lower_ascii(text::trim(raw));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, raw, "a boolean");
}

std::optional<std::string> to_optional(std::string_view v) {
  auto t = text::trim(v);
  if (t.empty()) return std::nullopt;
  return std::string(t);
}

std::string fmt_optional(const std::optional<std::string>& v) { return v.value_or(""); }

std::chrono::milliseconds seconds_to_ms(double s) {
  return std::chrono::milliseconds{static_cast<long long>(s * 1000.0)};
}

struct Field {
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

using Table = std::vector<std::pair<std::string_view, Field>>;

const Table& table() {
  static const Table kTable = [] {
    Table t;
    auto str = [&t](std::string_view key, std::string PipelineConfig::*member) {
      t.push_back({key, {[member](PipelineConfig& c, std::string_view v) { c.*member = std::string(text::trim(v)); },
                         [member](const PipelineConfig& c) { return c.*member; }}});
    };
    auto add = [&t](std::string_view key, Field f) { t.push_back({key, std::move(f)}); };

    str("input", &PipelineConfig::input);
    add("text_column", {[](auto& c, auto v) { c.columns.text = std::string(text::trim(v)); },
                        [](const auto& c) { return c.columns.text; }});
    add("id_column", {[](auto& c, auto v) { c.columns.id = to_optional(v); },
                      [](const auto& c) { return fmt_optional(c.columns.id); }});
    add("rating_column", {[](auto& c, auto v) { c.columns.rating = to_optional(v); },
                          [](const auto& c) { return fmt_optional(c.columns.rating); }});
    add("timestamp_column", {[](auto& c, auto v) { c.columns.timestamp = to_optional(v); },
                             [](const auto& c) { return fmt_optional(c.columns.timestamp); }});
    add("source_column", {[](auto& c, auto v) { c.columns.source = to_optional(v); },
                          [](const auto& c) { return fmt_optional(c.columns.source); }});
    add("lenient", {[](auto& c, auto v) { c.lenient = to_bool("lenient", v); },
                    [](const auto& c) { return std::string(c.lenient ? "true" : "false"); }});
    add("exclude_ratings",
        {[](auto& c, auto v) {
           c.exclude_ratings.clear();
           std::string item;
           std::istringstream in{std::string(v)};
           while (std::getline(in, item, ',')) {
             if (text::trim(item).empty()) continue;
             auto r = to_unsigned<int>("exclude_ratings", item);
             if (r < 1 || r > 5) bad_value("exclude_ratings", item, "a rating in 1..5");
             c.exclude_ratings.insert(r);
           }
         },
         [](const auto& c) {
           std::string out;
           for (int r : c.exclude_ratings) out += (out.empty() ? "" : ",") + std::to_string(r);
           return out;
         }});
    add("language_filter", {[](auto& c, auto v) { c.language_filter = to_bool("language_filter", v); },
                            [](const auto& c) { return std::string(c.language_filter ? "true" : "false"); }});
    str("language", &PipelineConfig::language);
    add("language_confidence",
        {[](auto& c, auto v) { c.language_confidence = to_double("language_confidence", v); },
         [](const auto& c) { return fmt::format("{}", c.language_confidence); }});
    add("latest", {[](auto& c, auto v) { c.latest = to_unsigned<std::size_t>("latest", v); },
                   [](const auto& c) { return std::to_string(c.latest); }});
    add("redact_pii", {[](auto& c, auto v) { c.redact_pii = to_bool("redact_pii", v); },
                       [](const auto& c) { return std::string(c.redact_pii ? "true" : "false"); }});

    add("embed_backend",
        {[](auto& c, auto v) { c.embedding.kind = embed::backend_kind_from_string(text::trim(v)); },
         [](const auto& c) { return std::string(embed::to_string(c.embedding.kind)); }});
    add("embed_endpoint", {[](auto& c, auto v) { c.embedding.endpoint = std::string(text::trim(v)); },
                           [](const auto& c) { return c.embedding.endpoint; }});
    add("embed_model", {[](auto& c, auto v) { c.embedding.model_name = std::string(text::trim(v)); },
                        [](const auto& c) { return c.embedding.model_name; }});
    add("embed_batch_size",
        {[](auto& c, auto v) { c.embedding.batch_size = to_unsigned<std::size_t>("embed_batch_size", v); },
         [](const auto& c) { return std::to_string(c.embedding.batch_size); }});
    add("embed_dim", {[](auto& c, auto v) { c.embedding.local_dim = to_unsigned<std::size_t>("embed_dim", v); },
                      [](const auto& c) { return std::to_string(c.embedding.local_dim); }});
    add("embed_expected_dim",
        {[](auto& c, auto v) {
           if (text::trim(v).empty()) {
             c.embedding.expected_dim.reset();
           } else {
             c.embedding.expected_dim = to_unsigned<std::size_t>("embed_expected_dim", v);
           }
         },
         [](const auto& c) {
           return c.embedding.expected_dim ? std::to_string(*c.embedding.expected_dim) : std::string();
         }});
    add("embed_api_key_env", {[](auto& c, auto v) { c.embedding.api_key_env = std::string(text::trim(v)); },
                              [](const auto& c) { return c.embedding.api_key_env; }});
    add("embed_timeout_s",
        {[](auto& c, auto v) { c.embedding.request.timeout = seconds_to_ms(to_double("embed_timeout_s", v)); },
         [](const auto& c) { return fmt::format("{}", c.embedding.request.timeout.count() / 1000.0); }});
    add("embed_retries",
        {[](auto& c, auto v) { c.embedding.request.retry.max_retries = to_unsigned<int>("embed_retries", v); },
         [](const auto& c) { return std::to_string(c.embedding.request.retry.max_retries); }});
    add("embed_parallelism",
        {[](auto& c, auto v) { c.embedding.parallelism = to_unsigned<std::size_t>("embed_parallelism", v); },
         [](const auto& c) { return std::to_string(c.embedding.parallelism); }});

    add("threshold", {[](auto& c, auto v) { c.cluster_params.initial_threshold = to_double("threshold", v); },
                      [](const auto& c) { return fmt::format("{}", c.cluster_params.initial_threshold); }});
    add("decline", {[](auto& c, auto v) { c.cluster_params.threshold_decline = to_double("decline", v); },
                    [](const auto& c) { return fmt::format("{}", c.cluster_params.threshold_decline); }});
    add("clusters",
        {[](auto& c, auto v) { c.cluster_params.num_clusters = to_unsigned<std::size_t>("clusters", v); },
         [](const auto& c) { return std::to_string(c.cluster_params.num_clusters); }});

    str("template", &PipelineConfig::template_path);
    add("max_input_tokens",
        {[](auto& c, auto v) { c.budget.max_input_tokens = to_unsigned<std::size_t>("max_input_tokens", v); },
         [](const auto& c) { return std::to_string(c.budget.max_input_tokens); }});
    add("max_new_tokens",
        {[](auto& c, auto v) { c.budget.max_new_tokens = to_unsigned<std::size_t>("max_new_tokens", v); },
         [](const auto& c) { return std::to_string(c.budget.max_new_tokens); }});
    add("chars_per_token", {[](auto& c, auto v) { c.budget.chars_per_token = to_double("chars_per_token", v); },
                            [](const auto& c) { return fmt::format("{}", c.budget.chars_per_token); }});

    add("chat_endpoint", {[](auto& c, auto v) { c.chat.endpoint = std::string(text::trim(v)); },
                          [](const auto& c) { return c.chat.endpoint; }});
    add("chat_model", {[](auto& c, auto v) { c.chat.model_name = std::string(text::trim(v)); },
                       [](const auto& c) { return c.chat.model_name; }});
    add("chat_api_key_env", {[](auto& c, auto v) { c.chat.api_key_env = std::string(text::trim(v)); },
                             [](const auto& c) { return c.chat.api_key_env; }});
    add("chat_system_message", {[](auto& c, auto v) { c.chat.system_message = std::string(text::trim(v)); },
                                [](const auto& c) { return c.chat.system_message; }});
    add("chat_temperature", {[](auto& c, auto v) { c.chat.temperature = to_double("chat_temperature", v); },
                             [](const auto& c) { return fmt::format("{}", c.chat.temperature); }});
    add("chat_timeout_s",
        {[](auto& c, auto v) { c.chat.request.timeout = seconds_to_ms(to_double("chat_timeout_s", v)); },
         [](const auto& c) { return fmt::format("{}", c.chat.request.timeout.count() / 1000.0); }});
    add("chat_retries",
        {[](auto& c, auto v) { c.chat.request.retry.max_retries = to_unsigned<int>("chat_retries", v); },
         [](const auto& c) { return std::to_string(c.chat.request.retry.max_retries); }});
    add("retry_backoff_ms",
        {[](auto& c, auto v) {
           auto ms = std::chrono::milliseconds{to_unsigned<long long>("retry_backoff_ms", v)};
           c.chat.request.retry.initial_backoff = ms;
           c.embedding.request.retry.initial_backoff = ms;
         },
         [](const auto& c) { return std::to_string(c.chat.request.retry.initial_backoff.count()); }});

    str("output_dir", &PipelineConfig::output_dir);
    add("seed", {[](auto& c, auto v) { c.seed = to_unsigned<std::uint64_t>("seed", v); },
                 [](const auto& c) { return std::to_string(c.seed); }});
    add("created_at",
        {[](auto& c, auto v) {
           auto t = text::trim(v);
           if (!t.empty() && !parse_timestamp(t)) bad_value("created_at", v, "an ISO-8601 timestamp");
           c.created_at = std::string(t);
         },
         [](const auto& c) { return c.created_at; }});
    return t;
  }();
  return kTable;
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> kKeys = [] {
    std::vector<std::string_view> keys;
    for (const auto& [k, f] : table()) keys.push_back(k);
    return keys;
  }();
  return kKeys;
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [k, f] : table()) {
    if (k == key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

PipelineConfig parse_config(std::string_view text_data, PipelineConfig base) {
  std::istringstream in{std::string(text_data)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    auto key = text::trim(t.substr(0, eq));
    try {
      apply_setting(base, key, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string to_text(const PipelineConfig& config) {
  std::string out;
  for (const auto& [k, f] : table()) out += fmt::format("{} = {}\n", k, f.get(config));
  return out;
}

void validate(const PipelineConfig& config) {
  try {
    config.cluster_params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  config.budget.validate();
  config.embedding.validate();
  if (config.latest < 1) throw ConfigError("latest must be >= 1");
  if (config.language_confidence < 0.0 || config.language_confidence > 1.0) {
    throw ConfigError("language_confidence must lie in [0, 1]");
  }
  if (config.columns.text.empty()) throw ConfigError("text_column must not be empty");
}

}  // namespace revinsight
