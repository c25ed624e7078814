#pragma once

namespace distfuse::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one CLI invocation. Exit codes: 0 success, 1 domain error
/// (infeasible constraints, malformed files), 2 usage error.
int dispatch(int argc, const char* const* argv);

}  // namespace distfuse::cli
