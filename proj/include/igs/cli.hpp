#pragma once

namespace igs {

/// Entry point behind main(). Exit codes: 0 success, 1 runtime failure,
/// 2 usage or config error.
int run_cli(int argc, const char* const* argv);

}  // namespace igs
