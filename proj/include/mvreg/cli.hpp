#pragma once

#include <ostream>

namespace mvreg {

/// Entry point of the mvreg tool: subcommands pairwise, multiview, synth and eval.
/// Returns 0 on success, 1 on library errors, 2 on bad arguments.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mvreg
