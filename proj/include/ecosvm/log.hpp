#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ecosvm::log {

// Verbosity from ECOSVM_LOG: "quiet"/"0", "info"/"1" (default), "debug"/"2".
inline int level() {
    static const int lvl = [] {
        const char* env = std::getenv("ECOSVM_LOG");
        if (!env) return 1;
        if (!std::strcmp(env, "quiet") || !std::strcmp(env, "0")) return 0;
        if (!std::strcmp(env, "debug") || !std::strcmp(env, "2")) return 2;
        return 1;
    }();
    return lvl;
}

template <class... Args>
void info(const char* fmt, Args... args) {
    if (level() >= 1) {
        std::fprintf(stderr, "[ecosvm] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <class... Args>
void debug(const char* fmt, Args... args) {
    if (level() >= 2) {
        std::fprintf(stderr, "[ecosvm:debug] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

}  // namespace ecosvm::log
