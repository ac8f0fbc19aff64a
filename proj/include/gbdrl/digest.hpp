// Copyright 2026 The gbdrl Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// SHA-256 content digests (OpenSSL EVP).

#ifndef GBDRL_DIGEST_HPP_
#define GBDRL_DIGEST_HPP_

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "gbdrl/core.hpp"

namespace gbdrl {

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

/// Digest of a multiset of records: hash each, sort, hash the sorted list.
inline std::string unordered_digest(const std::vector<std::string>& records) {
  std::vector<std::string> h;
  h.reserve(records.size());
  for (const auto& r : records) h.push_back(sha256_hex(r));
  std::sort(h.begin(), h.end());
  std::string joined;
  for (const auto& s : h) joined += s;
  return sha256_hex(joined);
}

}  // namespace gbdrl

#endif  // GBDRL_DIGEST_HPP_
