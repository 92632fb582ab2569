#include "note_forge/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace note_forge::log {

namespace {

Level initial_level() {
  const char* env = std::getenv("NOTE_FORGE_LOG");
  if (env == nullptr) return Level::warn;
  const std::string v(env);
  if (v == "error") return Level::error;
  if (v == "info") return Level::info;
  if (v == "debug") return Level::debug;
  return Level::warn;
}

std::atomic<int>& current() {
  static std::atomic<int> value{static_cast<int>(initial_level())};
  return value;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level l) { current().store(static_cast<int>(l)); }

void write(Level l, std::string_view message) {
  if (static_cast<int>(l) > current().load()) return;
  std::lock_guard lock(sink_mutex());
  std::cerr << "[note-forge " << kNames[static_cast<int>(l)] << "] " << message << '\n';
}

}  // namespace note_forge::log
