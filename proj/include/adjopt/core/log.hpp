#pragma once

#include <atomic>
#include <cstdio>
#include <string>

namespace adjopt {

inline std::atomic<bool>& quiet_flag()
{
    static std::atomic<bool> q{false};
    return q;
}

inline void set_quiet(bool q) { quiet_flag() = q; }

inline void warn(const std::string& msg)
{
    if (!quiet_flag()) std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

inline void info(const std::string& msg)
{
    if (!quiet_flag()) std::fprintf(stderr, "%s\n", msg.c_str());
}

} // namespace adjopt
