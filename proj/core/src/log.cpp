#include "rave/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace rave::log {

namespace {
std::atomic<Level> g_threshold{Level::Info};
std::mutex g_mutex;

const char* level_tag(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
    }
    return "?";
}
}  // namespace

Level threshold() { return g_threshold.load(std::memory_order_relaxed); }

void set_threshold(Level level) { g_threshold.store(level, std::memory_order_relaxed); }

void write(Level level, const std::string& message) {
    if (level < threshold()) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[rave %s] %s\n", level_tag(level), message.c_str());
}

}  // namespace rave::log
