#pragma once

#include <charconv>
#include <string>

namespace cbfswarm {

/// Shortest decimal form that round-trips to the same double. Used for all
/// file output so that reruns with equal inputs produce byte-equal files.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace cbfswarm
