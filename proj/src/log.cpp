#include "netgen/log.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <iostream>
#include <mutex>

namespace netgen::log {
namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_file_mutex;
std::ostream* g_file = nullptr;

void stamp(std::ostream& out) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  out << buf;
}

void emit(Level at, const char* tag, std::string_view msg) {
  if (at >= g_level.load(std::memory_order_relaxed)) std::clog << "[" << tag << "] " << msg << '\n';
  if (at < Level::Info) return;
  std::lock_guard lock(g_file_mutex);
  if (g_file) {
    stamp(*g_file);
    *g_file << " [" << tag << "] " << msg << std::endl;
  }
}

}  // namespace

void set_level(Level level) { g_level.store(level, std::memory_order_relaxed); }
Level level() { return g_level.load(std::memory_order_relaxed); }

void set_file(std::ostream* out) {
  std::lock_guard lock(g_file_mutex);
  g_file = out;
}

void debug(std::string_view msg) { emit(Level::Debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::Info, "info", msg); }
void warn(std::string_view msg) { emit(Level::Warn, "warn", msg); }
void error(std::string_view msg) { emit(Level::Error, "error", msg); }

}  // namespace netgen::log
