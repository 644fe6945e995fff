#pragma once

// Command-line front end. Every command is driven by a JSON configuration
// built from the flags; reports embed that configuration, and `replay`
// feeds it back through the same path to reproduce the report.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdgof/core.hpp"

namespace rdgof {

enum ExitCode : int { kExitAccept = 0, kExitReject = 1, kExitInput = 2, kExitNumeric = 3 };

// One observation per line, '#' starts a comment, blank lines are skipped.
// InputError names the offending line.
std::vector<double> read_observations(std::istream& in);
std::vector<std::size_t> read_labels(std::istream& in, std::size_t l);
// Whitespace-separated rows of equal length.
DenseMatrix read_matrix(std::istream& in);
// Whitespace-separated probabilities, any line layout.
std::vector<double> read_probabilities(std::istream& in);

struct CommandOutcome {
  nlohmann::ordered_json report;
  int exit_code = kExitAccept;
};

// Runs the command described by `config`. `in` serves an input path of "-".
// `threads` only affects scheduling, never results.
CommandOutcome execute_config(const nlohmann::ordered_json& config, std::istream& in,
                              std::size_t threads = 0);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace rdgof
