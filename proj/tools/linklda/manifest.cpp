#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <regex>

#include "linklda/error.hpp"

namespace linklda::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

fs::path manifest_path_for(const fs::path& primary) {
  if (fs::is_directory(primary)) return primary / "manifest.json";
  return fs::path(primary.string() + ".manifest.json");
}

Manifest::Manifest(std::string command, const std::vector<std::string>& argv) {
  doc_["command"] = std::move(command);
  doc_["argv"] = argv;
  doc_["config"] = nlohmann::json::object();
  doc_["inputs"] = nlohmann::json::array();
  doc_["outputs"] = nlohmann::json::array();
  doc_["started"] = utc_timestamp();
}

void Manifest::add_input(const std::string& role, const fs::path& path) {
  doc_["inputs"].push_back({{"role", role}, {"path", fs::absolute(path).string()}, {"sha256", sha256_file(path)}});
}

void Manifest::add_output(const fs::path& path) {
  doc_["outputs"].push_back({{"path", fs::absolute(path).string()}, {"sha256", sha256_file(path)}});
}

void Manifest::write(const fs::path& where) {
  doc_["finished"] = utc_timestamp();
  std::ofstream out(where);
  if (!out) throw ValidationError("cannot write " + where.string());
  out << doc_.dump(2) << '\n';
}

nlohmann::json verify_artifact(const fs::path& artifact, const std::vector<RoleFile>& inputs) {
  static const std::regex chain_suffix(R"(^(.*)\.chain[0-9]+$)");
  std::smatch m;
  const std::string name = artifact.string();
  const fs::path primary = std::regex_match(name, m, chain_suffix) ? fs::path(m[1].str()) : artifact;
  const fs::path where = manifest_path_for(primary);
  std::ifstream in(where);
  if (!in) throw ValidationError("no manifest for " + name + " (expected " + where.string() + ")");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("unreadable manifest " + where.string() + ": " + e.what());
  }

  const std::string digest = sha256_file(artifact);
  bool found = false;
  for (const auto& out : doc.value("outputs", nlohmann::json::array())) {
    if (fs::path(out.value("path", "")).filename() != artifact.filename()) continue;
    found = true;
    if (out.value("sha256", "") != digest) {
      throw ValidationError("digest mismatch for " + name + ": manifest records " + out.value("sha256", "") +
                            ", file has " + digest);
    }
  }
  if (!found) throw ValidationError(where.string() + " does not list " + name + " as an output");

  const auto recorded = doc.value("inputs", nlohmann::json::array());
  for (const auto& input : inputs) {
    const nlohmann::json* match = nullptr;
    for (const auto& r : recorded) {
      if (r.value("role", "") == input.role) match = &r;
    }
    if (match == nullptr) throw ValidationError("input '" + input.role + "' was not used to build " + name);
    if ((*match).value("sha256", "") != sha256_file(input.path)) {
      throw ValidationError("digest mismatch: " + input.path.string() + " differs from the '" + input.role +
                            "' input recorded for " + name);
    }
  }
  for (const auto& r : recorded) {
    const std::string role = r.value("role", "");
    bool given = false;
    for (const auto& input : inputs) given = given || input.role == role;
    if (!given && role != "checkpoint") {
      throw ValidationError(name + " was built with a '" + role + "' input that is missing now");
    }
  }
  return doc;
}

}  // namespace linklda::cli
