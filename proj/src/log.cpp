#include "kswarm/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace kswarm::log {
namespace {

Level from_env() {
    const char* env = std::getenv("KS_LOG");
    if (env == nullptr) return Level::warn;
    const std::string v(env);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<Level>& current() {
    static std::atomic<Level> l{from_env()};
    return l;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

constexpr std::string_view tag(Level l) {
    switch (l) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

}  // namespace

Level level() { return current().load(); }
void set_level(Level l) { current().store(l); }

void write(Level l, std::string_view msg) {
    if (static_cast<int>(l) > static_cast<int>(level())) return;
    std::lock_guard lock(sink_mutex());
    std::cerr << "[kswarm " << tag(l) << "] " << msg << '\n';
}

}  // namespace kswarm::log
