#include "cbfswarm/cli.hpp"

int main(int argc, char** argv) { return cbfswarm::cli::cli_main(argc, argv); }
