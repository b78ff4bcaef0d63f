#pragma once

namespace crop {

// Entry point behind the `crop` binary: subcommands train, evaluate, heatmap,
// oracle and plot. Returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace crop
