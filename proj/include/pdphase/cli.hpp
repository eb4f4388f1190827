#pragma once

namespace pdphase::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one `pd-phaselab` invocation. Returns 0 on success, 1 on invalid input
/// or unusable data, 2 when an internal invariant fails.
int dispatch(int argc, const char* const* argv);

} // namespace pdphase::cli
