#include "mbern_cli/report.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include <json.hpp>

namespace mbern::cli {

namespace {

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
std::string cell(const std::optional<bool>& v) {
  return v ? std::string(*v ? "true" : "false") : std::string();
}
std::string cell(const std::optional<std::string>& v) { return v ? csv_field(*v) : std::string(); }
std::string cell(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string json_value(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("null");
}
std::string json_value(const std::optional<bool>& v) {
  return v ? std::string(*v ? "true" : "false") : std::string("null");
}
std::string json_value(const std::optional<std::string>& v) {
  return v ? quote(*v) : std::string("null");
}
std::string json_value(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string("null");
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_rows(std::ostream& out, const std::vector<ReportRow>& rows, Format format) {
  if (format == Format::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
      out << format_number(r.t) << ',' << cell(r.bound_raw) << ',' << cell(r.bound_clipped) << ','
          << cell(r.regime) << ',' << cell(r.p_hat) << ',' << cell(r.ci_low) << ','
          << cell(r.ci_high) << ',' << cell(r.exact_p) << ',' << cell(r.dominated) << ','
          << csv_field(r.ensemble_id) << ',' << cell(r.seed) << '\n';
    }
    return;
  }
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"t\": " << format_number(r.t) << ", \"bound_raw\": " << json_value(r.bound_raw)
        << ", \"bound_clipped\": " << json_value(r.bound_clipped)
        << ", \"regime\": " << json_value(r.regime) << ", \"p_hat\": " << json_value(r.p_hat)
        << ", \"ci_low\": " << json_value(r.ci_low) << ", \"ci_high\": " << json_value(r.ci_high)
        << ", \"exact_p\": " << json_value(r.exact_p)
        << ", \"dominated\": " << json_value(r.dominated)
        << ", \"ensemble_id\": " << quote(r.ensemble_id) << ", \"seed\": " << json_value(r.seed)
        << '}' << (i + 1 < rows.size() ? "," : "") << '\n';
  }
  out << "]\n";
}

void write_baselines(std::ostream& out, const std::vector<BaselineRow>& rows, Format format) {
  if (format == Format::csv) {
    out << "t,classical_baseline,intdim_poly_baseline\n";
    for (const auto& r : rows) {
      out << format_number(r.t) << ',' << format_number(r.classical) << ','
          << format_number(r.intdim_poly) << '\n';
    }
    return;
  }
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"t\": " << format_number(r.t)
        << ", \"classical_baseline\": " << format_number(r.classical)
        << ", \"intdim_poly_baseline\": " << format_number(r.intdim_poly) << '}'
        << (i + 1 < rows.size() ? "," : "") << '\n';
  }
  out << "]\n";
}

void write_checks(std::ostream& out, const std::vector<checks::CheckResult>& rows, Format format) {
  if (format == Format::csv) {
    out << "name,passed,cases,worst_margin\n";
    for (const auto& r : rows) {
      out << r.name << ',' << (r.passed ? "true" : "false") << ',' << r.cases << ','
          << format_number(r.worst_margin) << '\n';
    }
    return;
  }
  out << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "  {\"name\": " << quote(r.name) << ", \"passed\": " << (r.passed ? "true" : "false")
        << ", \"cases\": " << r.cases << ", \"worst_margin\": " << format_number(r.worst_margin)
        << '}' << (i + 1 < rows.size() ? "," : "") << '\n';
  }
  out << "]\n";
}

void print_check_table(std::ostream& out, const std::vector<checks::CheckResult>& rows) {
  std::array<char, 160> line{};
  std::snprintf(line.data(), line.size(), "%-26s %-6s %8s %14s\n", "check", "result", "cases",
                "worst_margin");
  out << line.data();
  for (const auto& r : rows) {
    std::snprintf(line.data(), line.size(), "%-26s %-6s %8llu %14.6e\n", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", static_cast<unsigned long long>(r.cases),
                  r.worst_margin);
    out << line.data();
  }
}

}  // namespace mbern::cli
