#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sirs {

/// Plain-text `key = value` run manifest. Holds everything needed to rerun
/// a command bit-identically: tool version, subcommand, flags, the full
/// canonical configuration, and seeds.
class Manifest {
  public:
    Manifest(const std::string& command);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set_config(const std::string& canonical_text);

    void write(const std::string& path) const;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string config_block_;
};

}  // namespace sirs
