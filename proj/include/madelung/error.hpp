#pragma once

#include <stdexcept>
#include <string>

namespace madelung {

/// Failure of a documented precondition or a numerical routine.
/// `kind` is a short machine-readable tag (e.g. "precondition", "convergence").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace madelung
