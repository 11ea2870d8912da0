#pragma once

// File output helpers: atomic writes, JSON serialization of the core types,
// and run manifests.

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sp/liouville.hpp"

namespace sp {

inline constexpr const char* kVersion = "0.1.0";

// Write via a temp file in the same directory, then rename into place.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a 64-bit hash, hex string; used to fingerprint configs in manifests.
std::string fnv1a_hex(const std::string& s);

nlohmann::json operator_to_json(const Operator& op);       // {"dims", "re", "im"}
nlohmann::json spectral_to_json(const SpectralResult& r);  // {"eigenvalues", "gap", "steady_state"}

// manifest.json: config hash, software version, wall time.
void write_manifest(const std::filesystem::path& out_dir, const std::string& config_text,
                    double wall_seconds);

}  // namespace sp
