#pragma once

#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace oneshot::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

inline Level& min_level() {
    static Level lvl = Level::info;
    return lvl;
}

inline std::mutex& mutex() {
    static std::mutex m;
    return m;
}

// Level-tagged lines to stderr; stdout stays free for data.
inline void emit(Level lvl, const std::string& msg) {
    if (lvl < min_level()) return;
    static const char* tags[] = {"[debug]", "[info]", "[warn]", "[error]"};
    std::lock_guard<std::mutex> lock(mutex());
    std::cerr << tags[static_cast<int>(lvl)] << " " << msg << "\n";
}

inline void debug(const std::string& msg) { emit(Level::debug, msg); }
inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void error(const std::string& msg) { emit(Level::error, msg); }

}  // namespace oneshot::log
