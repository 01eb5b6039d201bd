#pragma once

#include "argen/biaslab.hpp"
#include "argen/rational.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace argen {
namespace report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "argen-report-v1";

// Exact value plus a display-only decimal: {"exact": "p/q", "approx": "..."}.
Json rational_field(const Rat& value);

// The single versioned document every command emits.
struct Document {
  Json doc;

  std::string to_string() const;  // dump(2) + trailing newline

  static Document make(const std::string& command, Json inputs, Json results);

  // The schema-closed reader: validates the envelope (schema, command,
  // inputs, results) and throws std::invalid_argument on anything else.
  static Document parse(const std::string& text);
};

Json bias_report_json(const biaslab::BiasReport& report, const Vocabulary& vocab);

// Flat per-sequence table for plotting with external tools.
std::string bias_report_csv(const biaslab::BiasReport& report, const Vocabulary& vocab);
std::string bias_reports_csv(std::span<const biaslab::BiasReport> reports,
                             const Vocabulary& vocab);

}  // namespace report
}  // namespace argen
