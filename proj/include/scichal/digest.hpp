#pragma once

#include <openssl/evp.h>

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "scichal/error.hpp"

namespace scichal {

// Incremental SHA-256 backed by OpenSSL's EVP interface.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      fail(ErrorCode::kIo, "sha256: digest initialisation failed");
    }
  }

  Sha256& update(std::string_view bytes) {
    if (!bytes.empty() &&
        EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()) != 1) {
      fail(ErrorCode::kIo, "sha256: update failed");
    }
    return *this;
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1) {
      fail(ErrorCode::kIo, "sha256: finalisation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string result;
    result.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
      result.push_back(kHex[out[i] >> 4]);
      result.push_back(kHex[out[i] & 0x0f]);
    }
    return result;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view bytes) {
  return Sha256().update(bytes).hex();
}

}  // namespace scichal
