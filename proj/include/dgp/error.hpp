#pragma once

#include <stdexcept>
#include <string>

namespace dgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A summarizer or classifier backend failed after exhausting its retries.
class BackendError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage aborted. Completed stages stay cached on disk.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace dgp
