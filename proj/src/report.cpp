#include "argen/report.hpp"

#include <sstream>
#include <stdexcept>

namespace argen {
namespace report {

Json rational_field(const Rat& value) {
  return Json{{"exact", fraction_string(value)}, {"approx", decimal_string(value)}};
}

std::string Document::to_string() const { return doc.dump(2) + "\n"; }

Document Document::make(const std::string& command, Json inputs, Json results) {
  Document d;
  d.doc["schema"] = kSchema;
  d.doc["command"] = command;
  d.doc["inputs"] = std::move(inputs);
  d.doc["results"] = std::move(results);
  return d;
}

Document Document::parse(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("report is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("report must be a JSON object");
  if (!doc.contains("schema") || !doc["schema"].is_string() || doc["schema"] != kSchema)
    throw std::invalid_argument(std::string("report schema must be '") + kSchema + "'");
  if (!doc.contains("command") || !doc["command"].is_string())
    throw std::invalid_argument("report is missing the command field");
  if (!doc.contains("inputs") || !doc["inputs"].is_object())
    throw std::invalid_argument("report is missing the inputs object");
  if (!doc.contains("results") || !doc["results"].is_object())
    throw std::invalid_argument("report is missing the results object");
  return Document{std::move(doc)};
}

Json bias_report_json(const biaslab::BiasReport& report, const Vocabulary& vocab) {
  Json j;
  j["model"] = report.model_id;
  j["constraint"] = report.constraint_id;
  j["decoder"] = report.decoder_id;
  j["seed"] = report.seed;
  j["exact_support_size"] = report.exact_support_size;
  j["samples_requested"] = report.samples_requested;
  j["samples_feasible"] = report.samples_feasible;
  j["dead_ends"] = report.dead_ends;
  j["rejections"] = report.rejections;
  j["coverage"] = rational_field(report.coverage);
  j["tv_distance"] = rational_field(report.tv_distance);
  if (report.kl_defined) {
    j["kl_empirical_to_exact"] = report.kl_empirical_to_exact;
  } else {
    j["kl_empirical_to_exact"] = "undefined";
  }
  Json table = Json::array();
  for (const auto& row : report.table) {
    table.push_back(Json{{"sequence", vocab.render(row.sequence.tokens())},
                         {"exact", fraction_string(row.exact_probability)},
                         {"empirical", fraction_string(row.empirical_frequency)},
                         {"count", row.count}});
  }
  j["sequences"] = std::move(table);
  return j;
}

namespace {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void append_rows(std::ostringstream& out, const biaslab::BiasReport& report,
                 const Vocabulary& vocab) {
  for (const auto& row : report.table) {
    out << csv_quote(report.model_id) << ',' << csv_quote(report.constraint_id) << ','
        << csv_quote(report.decoder_id) << ',' << csv_quote(vocab.render(row.sequence.tokens()))
        << ',' << fraction_string(row.exact_probability) << ','
        << fraction_string(row.empirical_frequency) << ',' << row.count << ','
        << fraction_string(report.tv_distance) << ',' << fraction_string(report.coverage) << ','
        << report.dead_ends << ',' << report.rejections << '\n';
  }
}

}  // namespace

std::string bias_report_csv(const biaslab::BiasReport& report, const Vocabulary& vocab) {
  std::ostringstream out;
  out << "model,constraint,decoder,sequence,exact_conditional,empirical_frequency,count,"
         "tv_distance,coverage,dead_ends,rejections\n";
  append_rows(out, report, vocab);
  return out.str();
}

std::string bias_reports_csv(std::span<const biaslab::BiasReport> reports,
                             const Vocabulary& vocab) {
  std::ostringstream out;
  out << "model,constraint,decoder,sequence,exact_conditional,empirical_frequency,count,"
         "tv_distance,coverage,dead_ends,rejections\n";
  for (const auto& report : reports) append_rows(out, report, vocab);
  return out.str();
}

}  // namespace report
}  // namespace argen
