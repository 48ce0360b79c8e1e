#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "aim/geometry.hpp"

namespace aim {

/// 64-bit FNV-1a.
class Fnv1a64 {
public:
    static constexpr std::uint64_t kOffsetBasis = 0xCBF29CE484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001B3ULL;

    void update(std::string_view bytes);
    void update_u32(std::uint32_t v);
    void update_u64(std::uint64_t v);
    [[nodiscard]] std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = kOffsetBasis;
};

/// Stable digest of a bundle: FNV-1a 64 over the slots sorted by (tick, row, col),
/// each slot encoded as tick (u64 little endian), row (u32 LE), col (u32 LE).
std::uint64_t bundle_digest(const Bundle& bundle);

std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(std::string_view s);

}  // namespace aim
