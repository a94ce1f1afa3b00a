#pragma once

// Report rows and their CSV / JSON encodings. Numbers are written with 17
// significant digits, '.' decimal point, independent of the locale.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mbern/checks.hpp"
#include "mbern_cli/config.hpp"

namespace mbern::cli {

inline constexpr std::string_view kCsvHeader =
    "t,bound_raw,bound_clipped,regime,p_hat,ci_low,ci_high,exact_p,dominated,ensemble_id,seed";

// Absent cells are empty in CSV and null in JSON.
struct ReportRow {
  double t = 0.0;
  std::optional<double> bound_raw;
  std::optional<double> bound_clipped;
  std::optional<std::string> regime;
  std::optional<double> p_hat;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> exact_p;
  std::optional<bool> dominated;
  std::string ensemble_id;
  std::optional<std::uint64_t> seed;
};

struct BaselineRow {
  double t = 0.0;
  double classical = 0.0;    // 2 d exp(-psi)
  double intdim_poly = 0.0;  // intrinsic-dimension polynomial-factor bound
};

std::string format_number(double v);

void write_rows(std::ostream& out, const std::vector<ReportRow>& rows, Format format);
void write_baselines(std::ostream& out, const std::vector<BaselineRow>& rows, Format format);
void write_checks(std::ostream& out, const std::vector<checks::CheckResult>& rows, Format format);
// Fixed-width pass/fail table for terminals.
void print_check_table(std::ostream& out, const std::vector<checks::CheckResult>& rows);

}  // namespace mbern::cli
