#include "tiltgait/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace tiltgait {

namespace fs = std::filesystem;

namespace {

std::string to_hex(const unsigned char* data, unsigned len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xF];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return to_hex(digest.data(), len);
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

ArtifactEntry write_file_artifact(const fs::path& root, const std::string& relative,
                                  std::string_view content) {
  const fs::path full = root / relative;
  if (full.has_parent_path()) fs::create_directories(full.parent_path());
  {
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + full.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + full.string());
  }
  return {relative, sha256_hex(content), content.size()};
}

void RunManifest::write_artifact(const std::string& relative, std::string_view content) {
  artifacts.push_back(write_file_artifact(output_dir, relative, content));
}

void RunManifest::add_artifact(const std::string& relative) {
  const fs::path full = output_dir / relative;
  artifacts.push_back({relative, sha256_file(full), fs::file_size(full)});
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["sweep_id"] = sweep_id;
  j["config_path"] = config_path;
  j["output_dir"] = output_dir.string();
  j["axes"] = {{"gaits", gaits},
               {"periods", periods},
               {"scales", scales},
               {"decouplers", decouplers},
               {"references", references}};
  auto& runs_json = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    runs_json.push_back({{"run_id", r.run_id},
                         {"status", r.status},
                         {"diagnostic", r.diagnostic},
                         {"sup_error", r.sup_error}});
  }
  auto& files = j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& a : artifacts) {
    files.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  return j.dump(2) + "\n";
}

void RunManifest::save() const {
  fs::create_directories(output_dir);
  std::ofstream out(output_dir / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + output_dir.string());
  out << to_json();
}

std::vector<std::string> verify_artifacts(const fs::path& manifest_json) {
  const auto j = nlohmann::json::parse(read_file(manifest_json));
  const fs::path root = manifest_json.parent_path();
  std::vector<std::string> bad;
  for (const auto& a : j.at("artifacts")) {
    const auto rel = a.at("path").get<std::string>();
    const fs::path full = root / rel;
    if (!fs::exists(full) || sha256_file(full) != a.at("sha256").get<std::string>()) bad.push_back(rel);
  }
  return bad;
}

std::string sweep_id_for(std::string_view canonical_config) {
  return "sweep-" + sha256_hex(canonical_config).substr(0, 12);
}

}  // namespace tiltgait
