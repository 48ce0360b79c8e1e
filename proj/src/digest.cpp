#include "aim/digest.hpp"

#include <charconv>

#include "aim/types.hpp"

namespace aim {

void Fnv1a64::update(std::string_view bytes) {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= kPrime;
    }
}

void Fnv1a64::update_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        state_ ^= (v >> (8 * i)) & 0xFFU;
        state_ *= kPrime;
    }
}

void Fnv1a64::update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        state_ ^= (v >> (8 * i)) & 0xFFU;
        state_ *= kPrime;
    }
}

std::uint64_t bundle_digest(const Bundle& bundle) {
    Fnv1a64 h;
    for (const auto& s : bundle) {
        h.update_u64(static_cast<std::uint64_t>(s.tick));
        h.update_u32(static_cast<std::uint32_t>(s.cell.row));
        h.update_u32(static_cast<std::uint32_t>(s.cell.col));
    }
    return h.value();
}

std::string to_hex(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::uint64_t from_hex(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw AuditFormatError("malformed digest '" + std::string(s) + "'");
    return v;
}

}  // namespace aim
