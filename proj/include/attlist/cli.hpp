#pragma once

namespace attlist::cli {

// Entry point for the attlist binary: prepare / synthesize / train /
// evaluate / ablate / export-attention. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace attlist::cli
