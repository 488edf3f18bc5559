#include "droplab/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace droplab::log {

namespace {
std::atomic<int> g_level{static_cast<int>(Level::Warn)};
std::mutex g_mutex;

void emit(Level at, const char* tag, std::string_view msg) {
    if (static_cast<int>(at) > g_level.load(std::memory_order_relaxed)) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[droplab " << tag << "] " << msg << '\n';
}
}  // namespace

void set_level(Level level) { g_level.store(static_cast<int>(level), std::memory_order_relaxed); }
Level level() { return static_cast<Level>(g_level.load(std::memory_order_relaxed)); }

void warn(std::string_view msg) { emit(Level::Warn, "warn", msg); }
void info(std::string_view msg) { emit(Level::Info, "info", msg); }
void debug(std::string_view msg) { emit(Level::Debug, "debug", msg); }

}  // namespace droplab::log
