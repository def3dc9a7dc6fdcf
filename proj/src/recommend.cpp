#include "revinsight/recommend.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "revinsight/errors.hpp"
#include "revinsight/text.hpp"

namespace revinsight::recommend {

using nlohmann::json;

std::size_t PromptBudget::char_limit() const noexcept {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(max_input_tokens) * chars_per_token));
}

std::size_t PromptBudget::estimate_tokens(std::string_view s) const noexcept {
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(text::utf8_length(s)) / chars_per_token));
}

void PromptBudget::validate() const {
  if (max_input_tokens < 1) throw ConfigError("max_input_tokens must be >= 1");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
  if (!(chars_per_token > 0.0) || !std::isfinite(chars_per_token)) {
    throw ConfigError("chars_per_token must be > 0");
  }
}

PromptTemplate PromptTemplate::default_template() {
  PromptTemplate t;
  t.system_preamble =
      "You advise the owner of a local business. You turn one customer review into "
      "concrete operational changes the business can make this week.";
  t.instructions =
      "Think through the review step by step before answering. Find every distinct "
      "problem the customer reports. For each problem write one piece of advice that "
      "is clear, concise and directly applicable: say who on the team should do what, "
      "and when. Avoid generic or overly broad recommendations such as \"improve "
      "customer service\". Do not repeat the review and do not add commentary.";
  t.one_shot_example = OneShotExample{
      "Front desk lost my paperwork twice and nobody told me my appointment was moved. "
      "Drove forty minutes for nothing.",
      "ISSUE: Patient paperwork was misplaced at the front desk.\n"
      "ADVICE: Scan intake forms into the patient record at check-in and have the office "
      "manager audit missing files at the end of each day.\n"
      "ISSUE: The patient was not told about a rescheduled appointment.\n"
      "ADVICE: Send an automatic text and email whenever an appointment changes, and have "
      "the receptionist call any patient who has not confirmed within four hours."};
  t.output_format_spec =
      "Answer with one or more pairs in exactly this format and nothing else:\n"
      "ISSUE: <the problem in one sentence>\n"
      "ADVICE: <the specific action>\n\n"
      "Customer review:";
  return t;
}

PromptTemplate PromptTemplate::from_text(std::string body) {
  auto reviews = text::count_occurrences(body, kReviewSlot);
  if (reviews != 1) {
    throw ConfigError(fmt::format("template must contain exactly one {} slot, found {}",
                                  kReviewSlot, reviews));
  }
  auto examples = text::count_occurrences(body, kExampleSlot);
  if (examples > 1) {
    throw ConfigError(fmt::format("template may contain at most one {} slot, found {}",
                                  kExampleSlot, examples));
  }
  PromptTemplate t;
  t.layout = std::move(body);
  return t;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open template '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  auto t = from_text(buf.str());
  t.one_shot_example = default_template().one_shot_example;
  return t;
}

namespace {

std::string render_example(const std::optional<OneShotExample>& ex) {
  if (!ex) return {};
  return fmt::format("Example review:\n{}\n\nExample answer:\n{}", ex->review, ex->response);
}

}  // namespace

std::string PromptTemplate::render(std::string_view review_text) const {
  if (layout) {
    auto example = render_example(one_shot_example);
    auto slot = layout->find(kReviewSlot);
    std::string before = layout->substr(0, slot);
    std::string after = layout->substr(slot + kReviewSlot.size());
    return text::replace_all(before, kExampleSlot, example) + std::string(review_text) +
           text::replace_all(after, kExampleSlot, example);
  }
  std::string out;
  auto append = [&out](std::string_view section) {
    if (section.empty()) return;
    if (!out.empty()) out += "\n\n";
    out += section;
  };
  append(system_preamble);
  append(instructions);
  append(render_example(one_shot_example));
  append(output_format_spec);
  append(review_text);
  return out;
}

namespace {

/// Longest prefix of at most `max_chars` code points that ends before a
/// whitespace character, right-trimmed; hard cut when no whitespace exists.
std::string cut_at_whitespace(std::string_view s, std::size_t max_chars) {
  auto limit = text::utf8_offset(s, max_chars);
  if (limit >= s.size()) return std::string(s);
  std::size_t cut = limit;
  for (std::size_t i = limit + 1; i-- > 0;) {
    if (text::is_space(s[i])) {
      cut = i;
      break;
    }
  }
  auto kept = s.substr(0, cut);
  while (!kept.empty() && text::is_space(kept.back())) kept.remove_suffix(1);
  if (kept.empty()) kept = s.substr(0, limit);
  return std::string(kept);
}

}  // namespace

std::string truncate_to_budget(std::string_view s, const PromptBudget& budget) {
  if (budget.estimate_tokens(s) <= budget.max_input_tokens) return std::string(s);
  return cut_at_whitespace(s, budget.char_limit()) + std::string(kTruncationMarker);
}

std::string build_prompt(std::string_view review_text, const PromptTemplate& tmpl,
                         const PromptBudget& budget) {
  budget.validate();
  if (text::trim(review_text).empty()) throw InvalidArgument("build_prompt: review text is blank");

  auto full = tmpl.render(review_text);
  if (budget.estimate_tokens(full) <= budget.max_input_tokens) return full;

  // The review shrinks first; the marker is counted inside the limit so the
  // final whole-prompt check below leaves a fitting template untouched.
  const auto limit = budget.char_limit();
  // Rendered with a one-character stand-in: an empty review also drops its separator.
  const auto overhead = text::utf8_length(tmpl.render("x")) - 1;
  const auto marker = text::utf8_length(kTruncationMarker);
  std::size_t room = limit > overhead + marker ? limit - overhead - marker : 0;
  std::string review = room > 0 ? cut_at_whitespace(review_text, room) : std::string();
  review += kTruncationMarker;

  auto prompt = truncate_to_budget(tmpl.render(review), budget);
  if (text::trim(prompt).empty() || prompt == kTruncationMarker) {
    throw InvalidArgument("build_prompt: prompt is empty after truncation");
  }
  return prompt;
}

namespace {

const std::regex& label_regex() {
  static const std::regex kLabel(R"((ISSUE|ADVICE)[ \t]*:)", std::regex::icase);
  return kLabel;
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Strips markdown decoration and collapses whitespace.
std::string clean_field(std::string_view raw) {
  std::string s = text::replace_all(text::replace_all(raw, "**", ""), "__", "");
  s = text::replace_all(text::replace_all(s, "<u>", ""), "</u>", "");
  s = text::replace_all(text::replace_all(s, "<b>", ""), "</b>", "");

  // A trailing line holding only a list marker belongs to the next item.
  static const std::regex kTrailingBullet(R"((^|\n)[ \t]*([-*+]|\xE2\x80\xA2|[0-9]+[.)])[ \t]*$)");
  s = std::regex_replace(std::string(text::trim(s)), kTrailingBullet, "");

  std::string out;
  bool space = false;
  for (char c : s) {
    if (text::is_space(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  // Leftover single-character emphasis or bullets at either end.
  auto trimmed = std::string_view(out);
  auto strip_chars = std::string_view("*_`#-+ ");
  while (!trimmed.empty() && strip_chars.find(trimmed.front()) != std::string_view::npos) {
    trimmed.remove_prefix(1);
  }
  while (!trimmed.empty() && std::string_view("*_`# ").find(trimmed.back()) != std::string_view::npos) {
    trimmed.remove_suffix(1);
  }
  return std::string(trimmed);
}

}  // namespace

std::vector<Recommendation> parse_recommendations(std::string_view raw) {
  struct Label {
    bool issue;
    std::size_t begin, end;
  };
  std::vector<Label> labels;
  std::string s(raw);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), label_regex());
       it != std::sregex_iterator(); ++it) {
    auto pos = static_cast<std::size_t>(it->position(0));
    if (pos > 0 && is_word_char(s[pos - 1])) continue;  // "MISSUE:" is not a label
    bool issue = std::toupper(static_cast<unsigned char>(s[pos])) == 'I';
    labels.push_back({issue, pos, pos + static_cast<std::size_t>(it->length(0))});
  }

  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i].issue) continue;
    auto issue_end = i + 1 < labels.size() ? labels[i + 1].begin : s.size();
    if (i + 1 >= labels.size() || labels[i + 1].issue) continue;
    const auto& advice = labels[i + 1];
    auto advice_end = i + 2 < labels.size() ? labels[i + 2].begin : s.size();
    Recommendation rec{clean_field(std::string_view(s).substr(labels[i].end, issue_end - labels[i].end)),
                       clean_field(std::string_view(s).substr(advice.end, advice_end - advice.end))};
    if (!rec.issue.empty() && !rec.advice.empty()) out.push_back(std::move(rec));
    ++i;
  }
  return out;
}

std::string render_recommendations(const std::vector<Recommendation>& recs) {
  std::string out;
  for (const auto& r : recs) {
    if (!out.empty()) out += '\n';
    out += fmt::format("ISSUE: {}\nADVICE: {}", r.issue, r.advice);
  }
  return out;
}

void ChatClientConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("chat endpoint is not configured");
  try {
    http::parse_url(endpoint);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (model_name.empty()) throw ConfigError("chat model name is empty");
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw ConfigError("temperature must be >= 0");
  }
}

std::string build_chat_request(const ChatClientConfig& config, std::string_view prompt,
                               const PromptBudget& budget) {
  json messages = json::array();
  if (!config.system_message.empty()) {
    messages.push_back({{"role", "system"}, {"content", config.system_message}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt}});
  json body;
  body["model"] = config.model_name;
  body["messages"] = std::move(messages);
  body["max_tokens"] = budget.max_new_tokens;
  body["temperature"] = config.temperature;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  try {
    auto j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception& e) {
    throw GenerationError(fmt::format("malformed chat response: {}", e.what()));
  }
}

std::string strip_prompt_echo(std::string_view response, std::string_view prompt) {
  auto body = response;
  auto lead = body.find_first_not_of(" \t\r\n");
  if (!prompt.empty() && lead != std::string_view::npos &&
      body.substr(lead).substr(0, prompt.size()) == prompt) {
    body = text::trim(body.substr(lead + prompt.size()));
  }
  return std::string(body);
}

Generation generate(const ChatClientConfig& config, std::string_view prompt,
                    const PromptBudget& budget) {
  config.validate();
  if (text::trim(prompt).empty()) throw InvalidArgument("generate: prompt is empty");
  auto options = config.request;
  options.bearer_token = http::env_value(config.api_key_env);
  if (!config.api_key_env.empty() && !options.bearer_token) {
    throw ConfigError(fmt::format("environment variable {} (chat API key) is not set",
                                  config.api_key_env));
  }

  auto body = build_chat_request(config, prompt, budget);
  auto start = std::chrono::steady_clock::now();
  http::Response res;
  try {
    res = http::post_json(config.endpoint, body, options);
  } catch (const http::RequestError& e) {
    throw GenerationError(e.what());
  }
  auto elapsed = std::chrono::steady_clock::now() - start;

  Generation g;
  g.raw_response = strip_prompt_echo(parse_chat_response(res.body), prompt);
  g.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  g.retries = res.retries;
  return g;
}

json to_json(const GenerationRecord& r, bool include_timings) {
  json recs = json::array();
  for (const auto& rec : r.recommendations) {
    recs.push_back({{"issue", rec.issue}, {"advice", rec.advice}});
  }
  json j{{"representative_id", r.representative_id},
         {"prompt", r.prompt},
         {"raw_response", r.raw_response},
         {"recommendations", std::move(recs)},
         {"model_name", r.model_name},
         {"parse_failed", r.parse_failed},
         {"error", r.error ? json(*r.error) : json(nullptr)}};
  if (include_timings) {
    j["latency_ms"] = r.latency_ms;
    j["retries"] = r.retries;
  }
  return j;
}

GenerationRecord record_from_json(const json& j) {
  GenerationRecord r;
  r.representative_id = j.at("representative_id").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  for (const auto& rec : j.at("recommendations")) {
    r.recommendations.push_back(
        {rec.at("issue").get<std::string>(), rec.at("advice").get<std::string>()});
  }
  r.model_name = j.at("model_name").get<std::string>();
  r.parse_failed = j.at("parse_failed").get<bool>();
  if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
  r.latency_ms = j.value("latency_ms", 0.0);
  r.retries = j.value("retries", 0);
  return r;
}

std::vector<GenerationRecord> recommend_all(const cluster::ClusteringResult& result,
                                            const PromptTemplate& tmpl, const PromptBudget& budget,
                                            const ChatClientConfig& client,
                                            const RecommendOptions& options) {
  if (result.clusters.empty()) throw InvalidArgument("recommend_all: no clusters");
  budget.validate();
  client.validate();

  std::vector<GenerationRecord> records;
  std::size_t failures = 0;
  std::string last_error;
  for (const auto& c : result.clusters) {
    auto done = options.completed.find(c.representative_id);
    if (done != options.completed.end() && !done->second.failed()) {
      records.push_back(done->second);
      continue;
    }

    GenerationRecord rec;
    rec.representative_id = c.representative_id;
    rec.model_name = client.model_name;
    rec.prompt = build_prompt(c.representative_text, tmpl, budget);
    try {
      auto g = generate(client, rec.prompt, budget);
      rec.raw_response = std::move(g.raw_response);
      rec.latency_ms = g.latency_ms;
      rec.retries = g.retries;
      rec.recommendations = parse_recommendations(rec.raw_response);
      rec.parse_failed = rec.recommendations.empty();
    } catch (const GenerationError& e) {
      rec.error = e.what();
      last_error = e.what();
      ++failures;
    }
    if (options.on_record) options.on_record(rec);
    records.push_back(std::move(rec));
  }

  if (failures == records.size()) {
    throw GenerationError(fmt::format("all {} generations failed; last error: {}", failures,
                                      last_error));
  }
  return records;
}

}  // namespace revinsight::recommend
