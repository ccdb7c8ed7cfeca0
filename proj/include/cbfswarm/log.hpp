#pragma once

namespace cbfswarm {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Active level, read once from CBF_SWARM_LOG (error|warn|info|debug);
/// defaults to warn. Unknown values fall back to the default.
LogLevel log_level();

bool log_enabled(LogLevel level);

/// printf-style message to stderr, prefixed with the level tag.
void log_msg(LogLevel level, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

}  // namespace cbfswarm
