#pragma once

// Serialization of convergence and bound reports. CSV columns are
// n,mesh,gram_defect,criterion_defect,norm_defect with %.17g doubles.

#include <filesystem>
#include <string>

#include "unitlab/kernels.hpp"
#include "unitlab/trotter.hpp"

namespace unitlab {

std::string report_csv(const ConvergenceReport& report);
std::string report_json(const ConvergenceReport& report, int indent = 2);
std::string bound_report_json(const BoundReport& report, int indent = 2);
std::string conditional_report_json(const ConditionalReport& report, int indent = 2);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace unitlab
