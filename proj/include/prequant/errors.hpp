#pragma once

#include <stdexcept>
#include <string>

namespace prequant {

// A dilated or sheared function left the representable v-window.
class SupportMarginError : public std::runtime_error {
 public:
  explicit SupportMarginError(const std::string& what) : std::runtime_error(what) {}
};

// Two L2 functions from different backends (or incompatible grids) were combined.
class BackendMismatchError : public std::invalid_argument {
 public:
  explicit BackendMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace prequant
