#pragma once

#include <cdl/metrics.hpp>
#include <cdl/model.hpp>

#include <json.hpp>

#include <filesystem>

namespace cdl {

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// iter, per-step totals, and the loss breakdown, one row per iteration.
void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& file);
TrainingTrace::Iteration parse_trace_row(const std::string& line);
std::vector<TrainingTrace::Iteration> read_trace_csv(const std::filesystem::path& file);

/// Writes report.json (report plus run metadata from the trace) and trace.csv
/// into `directory`.
void export_report(const EvalReport& report, const TrainingTrace& trace,
                   const std::filesystem::path& directory);

}  // namespace cdl
