#include "rdgof/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rdgof {

namespace {

void emit(const nlohmann::ordered_json& v, std::ostringstream& os, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::ordered_json(key).dump() << ": ";
        emit(item, os, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& item : v) flat = flat && !item.is_structured();
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) os << ", ";
          emit(v[i], os, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        emit(v[i], os, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(v.get<double>());
      return;
    default:
      os << v.dump();
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::ordered_json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string to_json_text(const nlohmann::ordered_json& value) {
  std::ostringstream os;
  emit(value, os, 0);
  os << "\n";
  return os.str();
}

std::string decision_of(const TestReport& report) {
  if (!report.critical_value) return "undecided";
  return report.statistic >= *report.critical_value ? "reject" : "accept";
}

nlohmann::ordered_json report_json(const TestReport& report, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = report.config;
  j["kernel"] = report.kernel;
  j["n"] = report.n;
  j["statistic"] = json_number(report.statistic);
  j["critical_value"] =
      report.critical_value ? json_number(*report.critical_value) : nlohmann::ordered_json();
  j["p_value"] = report.p_value ? json_number(*report.p_value) : nlohmann::ordered_json();
  j["decision"] = decision_of(report);
  j["seed"] = report.seed;
  j["tool_version"] = kToolVersion;
  return j;
}

}  // namespace rdgof
