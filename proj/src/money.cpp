#include "llmsast/money.hpp"

#include "llmsast/error.hpp"

#include <cstdlib>
#include <limits>

namespace llmsast {
namespace {
__extension__ typedef __int128 wide_int;
} // namespace

std::optional<Money> Money::parse(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return std::nullopt;
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || frac.size() > 6 || whole.size() > 12) return std::nullopt;
    if (dot != std::string_view::npos && frac.empty()) return std::nullopt;

    std::int64_t micros = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') return std::nullopt;
        micros = micros * 10 + (c - '0');
    }
    std::int64_t f = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        if (i < frac.size()) {
            if (frac[i] < '0' || frac[i] > '9') return std::nullopt;
            f = f * 10 + (frac[i] - '0');
        } else {
            f *= 10;
        }
    }
    micros = micros * 1'000'000 + f;
    return Money(negative ? -micros : micros);
}

std::string Money::str() const {
    const std::uint64_t mag = micros_ < 0 ? 0 - static_cast<std::uint64_t>(micros_) : static_cast<std::uint64_t>(micros_);
    std::string frac = std::to_string(mag % 1'000'000);
    frac.insert(0, 6 - frac.size(), '0');
    return (micros_ < 0 ? "-" : "") + std::to_string(mag / 1'000'000) + "." + frac;
}

std::string Money::str_cents() const {
    const std::uint64_t mag = micros_ < 0 ? 0 - static_cast<std::uint64_t>(micros_) : static_cast<std::uint64_t>(micros_);
    const std::uint64_t cents = (mag + 5'000) / 10'000;
    std::string frac = std::to_string(cents % 100);
    frac.insert(0, 2 - frac.size(), '0');
    return (micros_ < 0 && cents ? "-" : "") + std::to_string(cents / 100) + "." + frac;
}

Money token_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, Money input_price_per_1k,
                 Money output_price_per_1k) {
    if (input_price_per_1k.micros() < 0 || output_price_per_1k.micros() < 0) {
        throw ConfigError("token_cost: negative price");
    }
    const wide_int scaled = static_cast<wide_int>(input_tokens) * input_price_per_1k.micros() +
                            static_cast<wide_int>(output_tokens) * output_price_per_1k.micros();
    const wide_int micros = (scaled + 500) / 1000;
    if (micros > std::numeric_limits<std::int64_t>::max()) throw Error("token_cost: overflow");
    return Money::from_micros(static_cast<std::int64_t>(micros));
}

} // namespace llmsast
