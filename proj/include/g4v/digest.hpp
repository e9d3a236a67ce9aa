#pragma once

// Content digests that tie fit reports to their input data.
//
// The canonical data block is the input's numeric columns rendered one row
// per line as "%.17g,%.17g\n" (no header, no metadata). The digest is
// "sha256:" followed by the lowercase hex SHA-256 of that block.

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

#include "g4v/data.hpp"
#include "g4v/error.hpp"

namespace g4v {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string canonical_block(std::span<const double> a, std::span<const double> b) {
    std::string out;
    out.reserve(a.size() * 40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out += format_g17(a[i]);
        out += ',';
        out += format_g17(b[i]);
        out += '\n';
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

inline std::string content_digest(std::span<const double> a, std::span<const double> b) {
    return "sha256:" + sha256_hex(canonical_block(a, b));
}

inline std::string content_digest(const Spectrum& s) { return content_digest(s.detunings, s.counts); }
inline std::string content_digest(const DecayTrace& t) { return content_digest(t.bin_centers, t.counts); }

}  // namespace g4v
