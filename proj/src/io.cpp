#include "sp/io.hpp"

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace sp {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("atomic_write_file: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json operator_to_json(const Operator& op) {
  nlohmann::json j;
  j["dims"] = op.space().dims();
  const int n = op.dim();
  auto re = nlohmann::json::array();
  auto im = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    auto rrow = nlohmann::json::array();
    auto irow = nlohmann::json::array();
    for (int k = 0; k < n; ++k) {
      rrow.push_back(op.at(i, k).real());
      irow.push_back(op.at(i, k).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

nlohmann::json spectral_to_json(const SpectralResult& r) {
  nlohmann::json j;
  auto eigs = nlohmann::json::array();
  for (const cx& v : r.eigenvalues) eigs.push_back({{"re", v.real()}, {"im", v.imag()}});
  j["eigenvalues"] = std::move(eigs);
  j["gap"] = r.gap;
  j["degenerate"] = r.degenerate;
  j["steady_state"] = operator_to_json(r.steady_state.op());
  return j;
}

void write_manifest(const fs::path& out_dir, const std::string& config_text,
                    double wall_seconds) {
  nlohmann::json j;
  j["config_hash"] = fnv1a_hex(config_text);
  j["version"] = kVersion;
  j["wall_time_s"] = wall_seconds;
  atomic_write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace sp
