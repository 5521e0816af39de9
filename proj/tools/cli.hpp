#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vpd::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kUnconverged = 2, kVerificationFailed = 3 };

int cmd_solve(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const std::string& config_path, const std::vector<double>& epsilons, const std::string& out_dir,
              std::ostream& log);
int cmd_verify(const std::string& bundle_dir, std::ostream& log);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_text(const std::string& text);

}  // namespace vpd::cli
