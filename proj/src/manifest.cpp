#include "sirs/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sirs/version.hpp"

namespace sirs {

Manifest::Manifest(const std::string& command) {
    entries_.emplace_back("tool", "sirsctl");
    entries_.emplace_back("version", kVersion);
    entries_.emplace_back("command", command);
}

void Manifest::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    entries_.emplace_back(key, buf);
}

void Manifest::set(const std::string& key, long long value) {
    entries_.emplace_back(key, std::to_string(value));
}

void Manifest::set_config(const std::string& canonical_text) { config_block_ = canonical_text; }

void Manifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    for (const auto& [key, value] : entries_) out << key << " = " << value << "\n";
    if (!config_block_.empty()) {
        out << "# --- configuration ---\n";
        out << config_block_;
    }
}

}  // namespace sirs
