#pragma once

#include "ibckit/common.hpp"

#include <iosfwd>
#include <string>

namespace ibckit::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit status for a toolkit error.
int exit_code(ErrorCode code);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Entry point of the ibckit command; `out` receives reports, `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ibckit::cli
