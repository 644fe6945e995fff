#pragma once

// JSON report emission. Doubles are written with 17 significant digits so a
// report parses back to the same bits; non-finite values become the strings
// "inf", "-inf" and "nan".

#include <string>

#include "json.hpp"
#include "rdgof/core.hpp"

namespace rdgof {

inline constexpr const char* kToolVersion = "0.1.0";

std::string format_double(double x);

// A JSON value for x that survives the non-finite cases.
nlohmann::ordered_json json_number(double x);

// Pretty-printed with two-space indentation and a trailing newline.
std::string to_json_text(const nlohmann::ordered_json& value);

// "accept", "reject" or "undecided" (no critical value).
std::string decision_of(const TestReport& report);

nlohmann::ordered_json report_json(const TestReport& report, const std::string& command);

}  // namespace rdgof
