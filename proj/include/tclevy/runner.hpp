#pragma once

namespace tclevy {

// Command line entry point: parses the subcommand and its options, runs it,
// writes artifacts plus a manifest to the output directory, and returns the
// process exit code (0 success, 1 failure, 2 parse or config errors).
int run_cli(int argc, char** argv);

} // namespace tclevy
