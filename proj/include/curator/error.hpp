#pragma once

#include <stdexcept>
#include <string>

namespace curator {

// Broad failure categories; the CLI maps each to its own exit code.
enum class ErrorKind {
  kIo,
  kValidation,
  kNumeric,
  kPolicy,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowIo(const std::string& msg) {
  throw Error(ErrorKind::kIo, msg);
}
[[noreturn]] inline void ThrowValidation(const std::string& msg) {
  throw Error(ErrorKind::kValidation, msg);
}
[[noreturn]] inline void ThrowNumeric(const std::string& msg) {
  throw Error(ErrorKind::kNumeric, msg);
}
[[noreturn]] inline void ThrowPolicy(const std::string& msg) {
  throw Error(ErrorKind::kPolicy, msg);
}

}  // namespace curator
