#include "unitlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace unitlab {

namespace {

using nlohmann::ordered_json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN; undefined rates are written as null.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < w->a.size(); ++i) {
    auto matrix = [](const Matrix& m) {
      ordered_json rows = ordered_json::array();
      for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
      }
      return rows;
    };
    out.push_back({{"label", w->labels[i]}, {"a", matrix(w->a[i])}, {"b", matrix(w->b[i])}});
  }
  return out;
}

}  // namespace

std::string report_csv(const ConvergenceReport& report) {
  std::string out = "n,mesh,gram_defect,criterion_defect,norm_defect\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.parts) + "," + g17(r.mesh) + "," + g17(r.gram_defect) + "," +
           g17(r.criterion_defect) + "," + g17(r.norm_defect) + "\n";
  }
  return out;
}

std::string report_json(const ConvergenceReport& report, int indent) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.parts},
                    {"mesh", r.mesh},
                    {"gram_defect", r.gram_defect},
                    {"criterion_defect", r.criterion_defect},
                    {"norm_defect", r.norm_defect},
                    {"norm_defect_min", r.norm_defect_min},
                    {"ambient_defect", r.ambient_defect},
                    {"identity_residual", r.identity_residual},
                    {"gram_norm", r.gram_norm},
                    {"increment", r.increment}});
  }
  ordered_json j = {
      {"expression", report.expression},
      {"candidate", report.candidate},
      {"horizon", report.horizon},
      {"schedule", report.schedule},
      {"seed", report.seed},
      {"verdict", std::string(to_string(report.verdict))},
      {"thresholds",
       {{"norm_tol", report.thresholds.norm_tol},
        {"min_rate", report.thresholds.min_rate},
        {"plateau", report.thresholds.plateau}}},
      {"scale", report.scale},
      {"fitted_rate",
       {{"criterion", number(report.criterion_rate)},
        {"gram", number(report.gram_rate)},
        {"norm", number(report.norm_rate)}}},
      {"limits",
       {{"method", report.limit_method},
        {"criterion", report.criterion_limit},
        {"gram", report.gram_limit},
        {"norm", report.norm_limit},
        {"ambient", report.ambient_limit}}},
      {"exact", report.exact},
      {"sequence_suffices", report.sequence_suffices},
      {"cauchy", report.cauchy},
      {"max_identity_residual", report.max_identity_residual},
      {"min_norm_defect", number(report.min_norm_defect)},
      {"notes", report.notes},
      {"rows", rows}};
  return j.dump(indent) + "\n";
}

std::string bound_report_json(const BoundReport& report, int indent) {
  ordered_json samples = ordered_json::array();
  for (auto [s, r] : report.m_samples) samples.push_back({{"s", s}, {"remainder", r}});
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"horizon", r.horizon},
                    {"n", r.parts},
                    {"mesh", r.mesh},
                    {"gram_defect", r.gram_defect},
                    {"bound", r.bound},
                    {"holds", r.holds},
                    {"gram_norm", r.gram_norm},
                    {"growth_bound", r.growth_bound},
                    {"bounded", r.bounded}});
  }
  ordered_json j = {{"k_norm", report.k_norm},
                    {"m_estimate", report.m_estimate},
                    {"m_stable", report.m_stable},
                    {"all_hold", report.all_hold},
                    {"all_bounded", report.all_bounded},
                    {"m_samples", samples},
                    {"rows", rows}};
  return j.dump(indent) + "\n";
}

std::string conditional_report_json(const ConditionalReport& report, int indent) {
  ordered_json j = {
      {"verdict", report.verdict},
      {"discrepancy", report.discrepancy},
      {"seed", report.seed},
      {"direct",
       {{"samples", report.direct.samples},
        {"violations", report.direct.violations},
        {"worst", report.direct.worst},
        {"passed", report.direct.passed}}},
      {"schoenberg",
       {{"grid", report.schoenberg.grid},
        {"min_eigenvalues", report.schoenberg.min_eigenvalues},
        {"passed", report.schoenberg.passed},
        {"first_failure", report.schoenberg.first_failure ? ordered_json(*report.schoenberg.first_failure)
                                                          : ordered_json(nullptr)}}},
      {"compressed",
       {{"min_eigenvalue", report.compressed.min_eigenvalue},
        {"threshold", report.compressed.threshold},
        {"passed", report.compressed.passed}}},
      {"witness", witness_json(report.witness)},
      {"summary", report.summary()}};
  return j.dump(indent) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace unitlab
