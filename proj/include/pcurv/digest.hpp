#ifndef PCURV_DIGEST_HPP
#define PCURV_DIGEST_HPP

#include <cstdio>
#include <string>

namespace pcurv {

// FNV-1a 64-bit, hex-encoded; stable across runs and platforms
inline std::string fnv1a_hex(const std::string& s) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return std::string(buf);
}

}  // namespace pcurv

#endif
