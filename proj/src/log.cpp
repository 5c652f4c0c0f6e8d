#include "veloreg/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace veloreg {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("VELOREG_LOG");
        if (!env) return LogLevel::quiet;
        std::string s(env);
        if (s == "debug" || s == "2") return LogLevel::debug;
        if (s == "info" || s == "1") return LogLevel::info;
        return LogLevel::quiet;
    }();
    return level;
}

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    std::cerr << "[veloreg] " << msg << std::endl;
}

} // namespace veloreg
