#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lostpage {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A URI (or another structured input) failed to parse.
class ParseError : public Error {
 public:
  /// `component` names the offending part: "scheme", "host", "port", ...
  ParseError(std::string component, const std::string& message)
      : Error(component + ": " + message), component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

/// Invalid configuration (weights, flags, config file values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable files, truncated streams.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Naive Bayes training could not proceed (empty corpus, empty class, ...).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Deep classification removed every candidate; callers fall back to the
/// first-level label.
class DeepClassificationError : public Error {
 public:
  using Error::Error;
};

/// Transient failure talking to an evidence source (timeout, bad payload).
/// Distinct from "not archived", which is a successful answer.
class RetryableError : public Error {
 public:
  using Error::Error;
};

}  // namespace lostpage
