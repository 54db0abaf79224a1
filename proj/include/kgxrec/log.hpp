#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace kgxrec::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Level comes from KGXREC_LOG_LEVEL (debug|info|warn|error); default info.
inline Level threshold() {
    static Level lvl = [] {
        const char* env = std::getenv("KGXREC_LOG_LEVEL");
        if (env == nullptr) return Level::Info;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        if (std::strcmp(env, "warn") == 0) return Level::Warn;
        if (std::strcmp(env, "error") == 0) return Level::Error;
        return Level::Info;
    }();
    return lvl;
}

inline void write(Level lvl, const std::string& msg) {
    if (lvl < threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void debug(const std::string& msg) { write(Level::Debug, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void warn(const std::string& msg) { write(Level::Warn, msg); }
inline void error(const std::string& msg) { write(Level::Error, msg); }

}  // namespace kgxrec::log
