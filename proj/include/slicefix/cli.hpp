// Command-line front end: slice, dataset, train, tune, infer, eval, stats,
// grad-check and replay.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace slicefix::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kUsageError = 2, kInternalError = 3 };

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// FNV-1a of a file's bytes, or of every regular file below a directory
/// (relative path and contents, in sorted path order).
std::uint64_t path_hash(const std::string &path);

} // namespace slicefix::cli
