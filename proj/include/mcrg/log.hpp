#pragma once

#include <fmt/format.h>

#include <string_view>

namespace mcrg::log {

enum class Level { info, warn, error };

// Line-oriented stderr logging. Timestamps are omitted in test mode
// (MCR_GRAPH_TEST_MODE set to a non-empty value other than "0") so that
// captured logs are reproducible.
void write(Level level, std::string_view message);
void set_quiet(bool quiet);
bool test_mode();

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
    write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
    write(Level::warn, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void error(fmt::format_string<Args...> f, Args&&... args) {
    write(Level::error, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace mcrg::log
