#pragma once

namespace slsi {

// Entry point behind the `slsi` binary; exposed so tests can drive the CLI
// in-process. Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int cli_main(int argc, const char* const* argv);

}  // namespace slsi
