#pragma once

// Run manifests: one JSON file per command recording the configuration,
// seeds, SHA-256 digests of inputs and outputs, and timing.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace linklda::cli {

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

/// `<primary>.manifest.json`, or `<dir>/manifest.json` when the primary output is a directory.
std::filesystem::path manifest_path_for(const std::filesystem::path& primary);

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv);

  nlohmann::json& config() { return doc_["config"]; }
  void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }
  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  /// Stamps the end time and writes the file.
  void write(const std::filesystem::path& where);

 private:
  nlohmann::json doc_;
};

/// An input file tagged with the role it plays (docs, vocab, links, ...).
struct RoleFile {
  std::string role;
  std::filesystem::path path;
};

/// Finds the manifest that produced `artifact` (a `.chainN` suffix is
/// ignored), checks the artifact's digest and that `inputs` match the
/// recorded inputs role by role. Throws ValidationError on any mismatch or
/// when the manifest is missing.
nlohmann::json verify_artifact(const std::filesystem::path& artifact, const std::vector<RoleFile>& inputs);

}  // namespace linklda::cli
