#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace vast {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

// Log level from VAST_LOG (error|warn|info|debug), default warn.
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char *env = std::getenv("VAST_LOG");
        if (!env) return LogLevel::Warn;
        if (!std::strcmp(env, "error")) return LogLevel::Error;
        if (!std::strcmp(env, "info")) return LogLevel::Info;
        if (!std::strcmp(env, "debug")) return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return lvl;
}

template <typename... Args>
void log_warn(const char *fmt, Args... args) {
    if (log_level() >= LogLevel::Warn) {
        std::fprintf(stderr, "[vast:warn] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_info(const char *fmt, Args... args) {
    if (log_level() >= LogLevel::Info) {
        std::fprintf(stderr, "[vast:info] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace vast
