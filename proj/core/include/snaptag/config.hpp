#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "snaptag/errors.hpp"

namespace snaptag {

/// Minimal INI-style config: [section] headers, key = value lines,
/// # or ; comments.
class Config {
 public:
  static Config parse(const std::string& content);
  static Config read_file(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace snaptag
