#pragma once

#include <cstdint>
#include <cstring>
#include <span>

#include "types.hpp"

namespace motley {

/// 64-bit FNV-1a, used for dataset checksums and result-set fingerprints.
class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }

    template <typename T>
    void value(const T& v) {
        bytes(&v, sizeof(T));
    }

    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t checksum(const Dataset& ds) {
    Fnv1a h;
    h.value(ds.schema.size());
    for (const auto& t : ds.tuples) {
        h.value(t.id);
        for (double v : t.values) {
            h.value(v);
        }
    }
    return h.digest();
}

/// Fingerprint of a result: answer ids in order plus their diversity flags.
inline std::uint64_t fingerprint(const ResultSet& rs) {
    Fnv1a h;
    for (const auto& a : rs.answers) {
        h.value(a.id);
        h.value(static_cast<unsigned char>(a.diverse));
    }
    return h.digest();
}

} // namespace motley
