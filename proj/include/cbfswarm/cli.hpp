#pragma once

namespace cbfswarm::cli {

/// Parses argv and dispatches to one of the subcommands (run, trials,
/// riskmap, compare). Returns the process exit code: 0 success, 1
/// usage/config error, 2 safety violation detected.
int cli_main(int argc, char** argv);

}  // namespace cbfswarm::cli
