#pragma once

namespace sdle {

/// Entry point of the command-line tool (run | sweep | history | list-models).
/// Returns the process exit status: 0 ok, 2 configuration error, 3 when more
/// than 5% of the requested realizations failed.
int cli_main(int argc, const char* const* argv);

}  // namespace sdle
