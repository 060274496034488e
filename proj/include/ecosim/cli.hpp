#pragma once

#include <exception>
#include <functional>
#include <iosfwd>

#include "ecosim/experiment.hpp"

namespace ecosim {

/// Exit status for an exception escaping a command.
ExitCode exit_code_for(const std::exception_ptr& error);

/// Runs `body`, printing any escaping exception to `err` and mapping it to
/// its exit status.
int guarded(const std::function<void()>& body, std::ostream& err);

/// Entry point of the `ecosim` executable. Default output directory is
/// $ECOSIM_OUT_DIR, else "ecosim-out".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecosim
