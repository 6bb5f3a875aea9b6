#pragma once

#include <stdexcept>
#include <string>

namespace semlabel {

/// Runtime error carrying a short machine-readable code ("dangling-edge",
/// "zero-vector", ...) next to the human-readable message. The CLI prints
/// the code so scripts can branch on it.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace semlabel
