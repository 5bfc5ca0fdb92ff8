#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace altimine::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one subcommand (gen-scene, annotate, augment, evaluate). `args` excludes the
/// program name. Diagnostics go to `err`; summaries and reports go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace altimine::cli
