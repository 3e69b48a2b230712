#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mcrg {

// UTC instant with millisecond resolution.
struct Timestamp {
    std::int64_t millis_since_epoch = 0;

    auto operator<=>(const Timestamp&) const = default;
};

// Accepts RFC 3339 date-times ("2021-03-04T05:06:07Z", optional fraction,
// "Z" or a numeric offset). Returns nullopt on anything else.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

// Canonical form: "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" when the instant has
// a sub-second part.
std::string format_rfc3339(Timestamp ts);

}  // namespace mcrg
