#pragma once

#include <stdexcept>

namespace snaptag {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snaptag
