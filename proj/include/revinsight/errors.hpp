#pragma once

#include <stdexcept>
#include <string>

namespace revinsight {

/// Process exit codes. Stable; scripts depend on them.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kIo = 3,
  kEmbedding = 4,
  kGeneration = 5,
};

/// Base for every error the pipeline raises on purpose. Each subclass maps to
/// one exit code so the CLI can translate without string matching.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ExitCode::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

class EmbeddingError : public Error {
 public:
  explicit EmbeddingError(const std::string& what)
      : Error(ExitCode::kEmbedding, what) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& what)
      : Error(ExitCode::kGeneration, what) {}
};

/// Invalid argument to a library function (violated precondition).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace revinsight
