#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revinsight/http.hpp"
#include "revinsight/simcluster.hpp"

namespace revinsight::recommend {

/// Appended wherever text is cut to fit the budget. One character.
inline constexpr std::string_view kTruncationMarker = "\xE2\x80\xA6";  // U+2026

/// Token limits for one request. Tokens are estimated from characters
/// (code points) with a fixed ratio since the real tokenizer lives behind the
/// endpoint.
struct PromptBudget {
  std::size_t max_input_tokens = 2048;
  std::size_t max_new_tokens = 512;
  double chars_per_token = 4.0;

  std::size_t char_limit() const noexcept;
  std::size_t estimate_tokens(std::string_view text) const noexcept;
  void validate() const;  // throws ConfigError
};

struct OneShotExample {
  std::string review;
  std::string response;
};

inline constexpr std::string_view kReviewSlot = "{{review}}";
inline constexpr std::string_view kExampleSlot = "{{example}}";

/// Master prompt. Either assembled from sections (preamble, instructions,
/// example, format spec, then the review, separated by blank lines and
/// skipping empty sections) or, when `layout` is set, a free-form text with
/// one {{review}} slot and at most one {{example}} slot.
struct PromptTemplate {
  std::string system_preamble;
  std::string instructions;
  std::optional<OneShotExample> one_shot_example;
  std::string output_format_spec;
  std::optional<std::string> layout;

  /// The bundled template: asks for specific, actionable ISSUE/ADVICE pairs
  /// and carries a one-shot example with two pairs.
  static PromptTemplate default_template();

  /// Throws ConfigError unless the text has exactly one {{review}} slot and
  /// at most one {{example}} slot.
  static PromptTemplate from_text(std::string text);
  static PromptTemplate from_file(const std::filesystem::path& path);

  std::string render(std::string_view review_text) const;
};

/// Unchanged when the estimated token count fits; otherwise cut at the last
/// whitespace before char_limit() code points (hard cut if there is none)
/// and suffixed with kTruncationMarker.
std::string truncate_to_budget(std::string_view text, const PromptBudget& budget);

/// Renders the template around the review, shrinking the review (never the
/// template) until the whole prompt fits. Only when the template alone
/// overflows is the rendered prompt's tail cut as well.
/// Throws InvalidArgument for a blank review or an empty result.
std::string build_prompt(std::string_view review_text, const PromptTemplate& tmpl,
                         const PromptBudget& budget);

struct Recommendation {
  std::string issue;
  std::string advice;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

/// Extracts ISSUE/ADVICE pairs in order. Labels match case-insensitively;
/// bold/underline markers and list bullets are stripped; internal whitespace
/// is collapsed. Pairs missing either side are dropped.
std::vector<Recommendation> parse_recommendations(std::string_view raw);

/// "ISSUE: ...\nADVICE: ..." per recommendation, pairs separated by '\n'.
std::string render_recommendations(const std::vector<Recommendation>& recs);

struct ChatClientConfig {
  std::string endpoint;  // full URL, e.g. http://host:8000/v1/chat/completions
  std::string model_name = "llama-3-8b-instruct";
  std::string api_key_env;     // empty: no Authorization header
  std::string system_message;  // sent as a system turn when non-empty
  double temperature = 0.0;
  http::RequestOptions request;

  void validate() const;  // throws ConfigError
};

/// {"model", "messages": [[system,] user], "max_tokens", "temperature"}.
std::string build_chat_request(const ChatClientConfig& config, std::string_view prompt,
                               const PromptBudget& budget);

/// choices[0].message.content, throws GenerationError when absent.
std::string parse_chat_response(std::string_view body);

/// Removes a verbatim echo of the prompt from the start of the response.
std::string strip_prompt_echo(std::string_view response, std::string_view prompt);

struct Generation {
  std::string raw_response;
  double latency_ms = 0.0;
  int retries = 0;
};

/// One chat-completion call. Throws GenerationError on transport failure
/// (after retries), non-2xx status or a malformed body; ConfigError when the
/// named API-key variable is unset.
Generation generate(const ChatClientConfig& config, std::string_view prompt,
                    const PromptBudget& budget);

struct GenerationRecord {
  std::string representative_id;
  std::string prompt;
  std::string raw_response;
  std::vector<Recommendation> recommendations;
  double latency_ms = 0.0;
  std::string model_name;
  int retries = 0;
  bool parse_failed = false;         // response had no ISSUE/ADVICE pair
  std::optional<std::string> error;  // set when the request failed for good

  bool failed() const noexcept { return error.has_value(); }

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

nlohmann::json to_json(const GenerationRecord& r, bool include_timings = true);
GenerationRecord record_from_json(const nlohmann::json& j);

struct RecommendOptions {
  /// Called after each newly produced record (successful or failed), in
  /// cluster order; used to flush progress to disk.
  std::function<void(const GenerationRecord&)> on_record;
  /// Records from an earlier, interrupted run keyed by representative id.
  /// Successful ones are reused without a request.
  std::map<std::string, GenerationRecord> completed;
};

/// One record per cluster, in cluster order, one request at a time. A failed
/// request is recorded and the loop moves on. Throws GenerationError when
/// every cluster failed and InvalidArgument when there are no clusters.
std::vector<GenerationRecord> recommend_all(const cluster::ClusteringResult& result,
                                            const PromptTemplate& tmpl,
                                            const PromptBudget& budget,
                                            const ChatClientConfig& client,
                                            const RecommendOptions& options = {});

}  // namespace revinsight::recommend
