#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace llmsast {

/// A CWE identifier. Canonical text form is "CWE-<n>" without leading zeros.
struct CweId {
    std::uint32_t number = 0;

    constexpr CweId() = default;
    constexpr explicit CweId(std::uint32_t n) : number(n) {}

    std::string str() const { return "CWE-" + std::to_string(number); }

    /// Strict parse of "CWE-<n>" or "<n>"; n must be >= 1 with no leading zeros.
    static std::optional<CweId> parse(std::string_view text);

    friend constexpr auto operator<=>(CweId, CweId) = default;
};

} // namespace llmsast

template <>
struct std::hash<llmsast::CweId> {
    std::size_t operator()(llmsast::CweId id) const noexcept { return std::hash<std::uint32_t>{}(id.number); }
};
