#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace bhtomo {

// FNV-1a, used for file checksums and config digests.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ull;
        }
    }

    void update(const std::string& s) { update(s.data(), s.size()); }

    std::uint64_t value() const { return hash_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t h = hash_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[h & 0xf];
            h >>= 4;
        }
        return out;
    }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string fnv1a64_hex(const std::string& s) {
    Fnv1a64 h;
    h.update(s);
    return h.hex();
}

}  // namespace bhtomo
