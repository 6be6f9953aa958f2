// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace bdbbm {

#ifndef BDBBM_VERSION
#define BDBBM_VERSION "0.0.0"
#endif

/// Lowercase hex SHA-256 of a byte string.
inline std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Run record: effective configuration, its hash, master seed, code version and artifact hashes.
struct Manifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = BDBBM_VERSION;
  std::map<std::string, std::string> artifacts;  ///< file name -> SHA-256

  std::string config_sha256() const { return sha256_hex(config.dump()); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config"] = config;
    j["config_sha256"] = config_sha256();
    j["seed"] = seed;
    j["version"] = version;
    j["artifacts"] = artifacts;
    return j;
  }

  static Manifest from_json(const nlohmann::json& j) {
    Manifest m;
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    if (j.at("config_sha256").get<std::string>() != m.config_sha256())
      throw std::runtime_error("manifest: config hash does not match the stored configuration");
    return m;
  }
};

}  // namespace bdbbm
