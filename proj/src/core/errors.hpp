#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace epifilter {

/// Failure categories. The first group maps to exit code 1 (validation),
/// the second to exit code 2 (numerical).
enum class ErrorKind {
  InvalidArgument,
  Config,
  Parse,
  Alignment,
  Workflow,
  Numerical,
  DegenerateUpdate,
  DegeneratePosterior,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::Numerical ||
           kind_ == ErrorKind::DegenerateUpdate ||
           kind_ == ErrorKind::DegeneratePosterior;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace epifilter
