#pragma once

#include <stdexcept>
#include <string>

#include "stgnn/types.hpp"

namespace stgnn {

// Non-finite numbers encountered mid-computation (training loss, rollout
// prediction). Carries the epoch or step where the blow-up happened.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Index where)
      : std::runtime_error(what), where_(where) {}

  Index where() const { return where_; }

 private:
  Index where_;
};

}  // namespace stgnn
