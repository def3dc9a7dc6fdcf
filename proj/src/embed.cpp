#include "revinsight/embed.hpp"

#include <cmath>
#include <future>

#include <fmt/format.h>
#include <json.hpp>

#include "revinsight/text.hpp"

namespace revinsight::embed {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("embedding vector must have dim >= 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("embedding vector has a non-finite entry");
  }
}

double EmbeddingVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector l2_normalize(const EmbeddingVector& v) {
  double n = v.norm();
  if (n == 0.0) throw ZeroNormError("cannot normalize a zero-norm vector");
  std::vector<double> out(v.values().begin(), v.values().end());
  for (auto& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

EmbeddingVector basis_vector(std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  v.at(0) = 1.0;
  return EmbeddingVector(std::move(v));
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kRemote ? "remote" : "local-test";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "remote") return BackendKind::kRemote;
  if (name == "local-test" || name == "local") return BackendKind::kLocalTest;
  throw ConfigError(fmt::format("unknown embedding backend '{}' (expected remote or local-test)",
                                name));
}

void EmbeddingBackendConfig::validate() const {
  if (batch_size < 1) throw ConfigError("embedding batch_size must be >= 1");
  if (parallelism < 1) throw ConfigError("embedding parallelism must be >= 1");
  if (expected_dim && *expected_dim < 1) throw ConfigError("expected_dim must be >= 1");
  if (kind == BackendKind::kRemote && endpoint.empty()) {
    throw ConfigError("remote embedding backend requires an endpoint");
  }
  if (kind == BackendKind::kLocalTest && local_dim < 1) {
    throw ConfigError("local-test embedding dim must be >= 1");
  }
}

HashingEncoder::HashingEncoder(std::size_t dim) : dim_(dim) {
  if (dim_ < 1) throw InvalidArgument("hashing encoder dim must be >= 1");
}

std::vector<double> HashingEncoder::counts(std::string_view input) const {
  std::vector<double> v(dim_, 0.0);
  for (const auto& token : text::word_tokens(input)) {
    v[text::fnv1a64(token) % dim_] += 1.0;
  }
  return v;
}

std::string build_embedding_request(std::string_view model, std::span<const std::string> texts) {
  json body;
  body["model"] = model;
  body["input"] = json::array();
  for (const auto& t : texts) body["input"].push_back(t);
  return body.dump();
}

std::vector<std::vector<double>> parse_embedding_response(std::string_view body,
                                                          std::size_t expected_count) {
  std::vector<std::vector<double>> out(expected_count);
  std::vector<bool> filled(expected_count, false);
  try {
    auto j = json::parse(body);
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != expected_count) {
      throw EmbeddingError(fmt::format("expected {} embeddings, got {}", expected_count,
                                       data.is_array() ? data.size() : 0));
    }
    for (std::size_t pos = 0; pos < data.size(); ++pos) {
      const auto& item = data[pos];
      auto index = item.contains("index") ? item["index"].get<std::size_t>() : pos;
      if (index >= expected_count || filled[index]) {
        throw EmbeddingError(fmt::format("embedding index {} out of range or repeated", index));
      }
      out[index] = item.at("embedding").get<std::vector<double>>();
      filled[index] = true;
    }
  } catch (const EmbeddingError&) {
    throw;
  } catch (const std::exception& e) {
    throw EmbeddingError(fmt::format("malformed embeddings response: {}", e.what()));
  }
  return out;
}

namespace {

struct BatchResult {
  std::vector<std::vector<double>> vectors;
  int retries = 0;
};

BatchResult fetch_batch(const EmbeddingBackendConfig& config, std::span<const std::string> texts,
                        const http::RequestOptions& options) {
  auto body = build_embedding_request(config.model_name, texts);
  try {
    auto res = http::post_json(config.endpoint, body, options);
    return {parse_embedding_response(res.body, texts.size()), res.retries};
  } catch (const http::RequestError& e) {
    throw EmbeddingError(fmt::format("embedding request failed: {}", e.what()));
  }
}

std::vector<std::vector<double>> encode_remote(const std::vector<std::string>& texts,
                                               const EmbeddingBackendConfig& config,
                                               EncodeStats& stats) {
  auto options = config.request;
  options.bearer_token = http::env_value(config.api_key_env);
  if (!config.api_key_env.empty() && !options.bearer_token) {
    throw ConfigError(
        fmt::format("environment variable {} (embedding API key) is not set", config.api_key_env));
  }

  std::vector<std::span<const std::string>> batches;
  std::span<const std::string> all(texts);
  for (std::size_t start = 0; start < all.size(); start += config.batch_size) {
    batches.push_back(all.subspan(start, std::min(config.batch_size, all.size() - start)));
  }

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  // Waves of up to `parallelism` concurrent requests; results are collected
  // in batch order, so completion order never affects the output.
  for (std::size_t wave = 0; wave < batches.size(); wave += config.parallelism) {
    std::vector<std::future<BatchResult>> inflight;
    auto wave_end = std::min(batches.size(), wave + config.parallelism);
    for (std::size_t b = wave; b < wave_end; ++b) {
      inflight.push_back(std::async(std::launch::async, fetch_batch, std::cref(config),
                                    batches[b], std::cref(options)));
    }
    for (auto& f : inflight) {
      auto result = f.get();
      ++stats.requests;
      stats.retries += static_cast<std::size_t>(result.retries);
      for (auto& v : result.vectors) out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace

std::vector<EmbeddingVector> encode(const std::vector<std::string>& texts,
                                    const EmbeddingBackendConfig& config, EncodeStats* stats) {
  if (texts.empty()) throw InvalidArgument("encode: text list is empty");
  config.validate();
  EncodeStats local;
  EncodeStats& st = stats ? *stats : local;

  std::vector<std::vector<double>> raw;
  if (config.kind == BackendKind::kLocalTest) {
    HashingEncoder encoder(config.local_dim);
    raw.reserve(texts.size());
    for (const auto& t : texts) raw.push_back(encoder.counts(t));
  } else {
    raw = encode_remote(texts, config, st);
  }

  const std::size_t dim = raw.front().size();
  if (dim == 0) throw EmbeddingError("backend returned an empty embedding");
  if (config.expected_dim && dim != *config.expected_dim) {
    throw EmbeddingError(
        fmt::format("embedding dim {} differs from expected {}", dim, *config.expected_dim));
  }

  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != dim) {
      throw EmbeddingError(
          fmt::format("embedding {} has dim {}, expected {}", i, raw[i].size(), dim));
    }
    try {
      out.push_back(l2_normalize(EmbeddingVector(std::move(raw[i]))));
    } catch (const ZeroNormError&) {
      st.degenerate.push_back(i);
      out.push_back(basis_vector(dim));
    } catch (const InvalidArgument& e) {
      throw EmbeddingError(fmt::format("embedding {}: {}", i, e.what()));
    }
  }
  return out;
}

}  // namespace revinsight::embed
