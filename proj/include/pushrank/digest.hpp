#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "pushrank/graph.hpp"

namespace pushrank {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

// SHA-256 of the canonical serialized edge list; stable across re-parses of
// the same graph, used to guard hub/patch files against stale inputs.
inline std::string graph_digest(const WeightedGraph& g) {
  std::ostringstream ss;
  g.serialize(ss);
  return sha256_hex(ss.str());
}

}  // namespace pushrank
