#pragma once

// Run manifests: what ran, on which inputs (by SHA-256), what it wrote and
// the headline numbers.

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "json.hpp"
#include "pingpong/errors.hpp"

namespace pingpong::io {

inline constexpr const char* kVersion = "1.0.0";

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot hash '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "pingpong";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["inputs"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::object();
    doc_["stages"] = nlohmann::json::array();
    doc_["metrics"] = nlohmann::json::object();
    doc_["complete"] = false;
  }

  void add_input(const std::string& role, const std::filesystem::path& path) {
    doc_["inputs"][role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
  void add_output(const std::filesystem::path& path) {
    doc_["outputs"][path.filename().string()] = {{"sha256", sha256_file(path)}};
  }
  void stage(const std::string& name, const std::string& status, const std::string& diagnostic = {}) {
    nlohmann::json s{{"name", name}, {"status", status}};
    if (!diagnostic.empty()) s["diagnostic"] = diagnostic;
    doc_["stages"].push_back(std::move(s));
  }
  nlohmann::json& metrics() { return doc_["metrics"]; }
  nlohmann::json& doc() { return doc_; }
  const nlohmann::json& doc() const { return doc_; }
  void set_complete(bool c) { doc_["complete"] = c; }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << doc_.dump(2) << '\n';
  }

 private:
  nlohmann::json doc_;
};

}  // namespace pingpong::io
