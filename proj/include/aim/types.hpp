#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aim {

/// Discrete simulated time step.
using Tick = std::int64_t;

/// Monetary amount in abstract money units.
using Money = double;

/// Opaque integer identifier, tagged so ids of different entities do not mix.
template <typename Tag>
struct StrongId {
    std::uint64_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint64_t v) : value(v) {}

    constexpr auto operator<=>(const StrongId&) const = default;
};

using VehicleId = StrongId<struct VehicleTag>;
using ReservationId = StrongId<struct ReservationTag>;
using IntersectionId = StrongId<struct IntersectionTag>;
using LinkId = StrongId<struct LinkTag>;

/// Positive rational speed in cells per tick.
struct Speed {
    std::int64_t num = 1;
    std::int64_t den = 1;

    constexpr Speed() = default;
    constexpr Speed(std::int64_t n, std::int64_t d) : num(n), den(d) {}

    [[nodiscard]] constexpr bool valid() const { return num > 0 && den > 0; }
    [[nodiscard]] constexpr double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    [[nodiscard]] Speed reduced() const {
        const auto g = std::gcd(num, den);
        return {num / g, den / g};
    }

    friend bool operator==(const Speed& a, const Speed& b) { return a.num * b.den == b.num * a.den; }
};

// Error hierarchy. Every failure the library reports derives from aim::Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class TooLateError : public Error {
public:
    using Error::Error;
};

class SizeLimitError : public Error {
public:
    using Error::Error;
};

class OrderingError : public Error {
public:
    using Error::Error;
};

class RoutingError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class AuditFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace aim

template <typename Tag>
struct std::hash<aim::StrongId<Tag>> {
    std::size_t operator()(const aim::StrongId<Tag>& id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
