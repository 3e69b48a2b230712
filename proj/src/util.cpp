#include "mcrg/hash.hpp"
#include "mcrg/log.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

namespace mcrg {

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

namespace log {

namespace {
bool g_quiet = false;

const char* level_name(Level level) {
    switch (level) {
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "info";
}
}  // namespace

bool test_mode() {
    const char* v = std::getenv("MCR_GRAPH_TEST_MODE");
    return v != nullptr && *v != '\0' && std::string_view(v) != "0";
}

void set_quiet(bool quiet) { g_quiet = quiet; }

void write(Level level, std::string_view message) {
    if (g_quiet && level == Level::info) return;
    std::string line;
    if (!test_mode()) {
        std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        line = fmt::format("{} [{}] {}\n", stamp, level_name(level), message);
    } else {
        line = fmt::format("[{}] {}\n", level_name(level), message);
    }
    std::fwrite(line.data(), 1, line.size(), stderr);
}

}  // namespace log
}  // namespace mcrg
