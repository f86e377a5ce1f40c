#pragma once

#include "lsrn/solver.hpp"

#include <iosfwd>
#include <string>

namespace lsrn {

inline constexpr const char* kReportSchema = "lsrn-report/1";

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(const std::string& name);

/// Serializes every SolveReport field except the solution vector and the
/// preconditioner factor. JSON is one object; CSV is "key,value" lines.
void write_report(std::ostream& out, const SolveReport& report, ReportFormat format);

std::string report_json(const SolveReport& report);

}  // namespace lsrn
