#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace llmsast {

/// Currency amount in millionths of a dollar. Sums are exact.
class Money {
public:
    constexpr Money() = default;
    static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }

    /// Decimal text with at most 6 fractional digits ("0.03", "12", "-0.5").
    static std::optional<Money> parse(std::string_view text);

    constexpr std::int64_t micros() const { return micros_; }

    /// Six fractional digits, e.g. "0.025000".
    std::string str() const;
    /// Rounded half up to cents, e.g. "0.03".
    std::string str_cents() const;

    constexpr Money& operator+=(Money o) {
        micros_ += o.micros_;
        return *this;
    }
    friend constexpr Money operator+(Money a, Money b) { return a += b; }
    friend constexpr auto operator<=>(Money, Money) = default;

private:
    constexpr explicit Money(std::int64_t m) : micros_(m) {}
    std::int64_t micros_ = 0;
};

/// (input_tokens * input_price + output_tokens * output_price) / 1000 with
/// prices per 1k tokens, rounded half up to the micro-dollar.
Money token_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, Money input_price_per_1k,
                 Money output_price_per_1k);

} // namespace llmsast
