#pragma once

// Observed or synthesized decision trials and their CSV representation.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ddmdrive/ddm.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/kinematics.hpp"

namespace ddmdrive {

struct TrialRecord {
  std::string participant_id;
  ScenarioKind kind = ScenarioKind::CutIn;
  double v0A = 0.0;
  Choice choice = Choice::None;
  std::optional<double> rt;
  std::optional<double> vb;  ///< braking-initiation speed (m/s)
  std::optional<double> ax;  ///< peak longitudinal acceleration magnitude (m/s^2)
  std::optional<double> ay;  ///< peak lateral acceleration magnitude (m/s^2)
  bool collided = false;

  bool operator==(const TrialRecord&) const = default;
};

inline constexpr std::string_view kTrialCsvHeader =
    "participant_id,scenario,v0A_mps,choice,rt_s,vb_mps,ax_mps2,ay_mps2,collided";

/// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double(std::string_view cell, const char* column) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto res = std::from_chars(cell.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(value)) {
    throw ValidationError(std::string(column) + ": not a finite number '" + std::string(cell) +
                          "'");
  }
  return value;
}

inline std::optional<double> parse_optional(std::string_view cell, const char* column) {
  if (cell.empty()) return std::nullopt;
  return parse_double(cell, column);
}

inline bool parse_flag(std::string_view cell) {
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  throw ValidationError("collided: expected 0/1/true/false, got '" + std::string(cell) + "'");
}

}  // namespace detail

inline void validate(const TrialRecord& r) {
  detail::require(!r.participant_id.empty(), "participant_id is empty");
  detail::require(r.participant_id.find_first_of(",\n\r") == std::string::npos,
                  "participant_id contains a separator");
  detail::require(std::isfinite(r.v0A) && r.v0A > 0.0, "v0A_mps must be positive");
  if (r.choice == Choice::None) {
    detail::require(!r.rt.has_value(), "rt_s must be empty when choice is none");
  } else {
    detail::require(r.rt.has_value(), "rt_s is required for brake/steer");
    detail::require(*r.rt > 0.0, "rt_s must be positive");
  }
  for (const auto* f : {&r.vb, &r.ax, &r.ay}) {
    if (*f) detail::require(**f >= 0.0, "behavior features must be non-negative");
  }
}

inline TrialRecord parse_trial_row(std::string_view line) {
  const auto cells = detail::split_csv_line(line);
  if (cells.size() != 9) {
    throw ValidationError("expected 9 columns, got " + std::to_string(cells.size()));
  }
  TrialRecord r;
  r.participant_id = std::string(cells[0]);
  r.kind = parse_scenario_kind(cells[1]);
  r.v0A = detail::parse_double(cells[2], "v0A_mps");
  r.choice = parse_choice(cells[3]);
  r.rt = detail::parse_optional(cells[4], "rt_s");
  r.vb = detail::parse_optional(cells[5], "vb_mps");
  r.ax = detail::parse_optional(cells[6], "ax_mps2");
  r.ay = detail::parse_optional(cells[7], "ay_mps2");
  r.collided = detail::parse_flag(cells[8]);
  validate(r);
  return r;
}

/// Parses a trial CSV. Every malformed row is reported (with its line
/// number) in a single ValidationError; nothing is dropped silently.
inline std::vector<TrialRecord> read_trials(std::istream& in, const std::string& source = "trials") {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) {
    throw ValidationError(source + ":1: header must be '" + std::string(kTrialCsvHeader) + "'");
  }
  std::vector<TrialRecord> records;
  std::vector<std::string> problems;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      records.push_back(parse_trial_row(line));
    } catch (const ValidationError& e) {
      problems.push_back(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " malformed row(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return records;
}

inline std::vector<TrialRecord> load_trials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_trials(in, path.string());
}

inline void write_trials(std::ostream& out, const std::vector<TrialRecord>& records) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.participant_id << ',' << to_string(r.kind) << ',' << format_double(r.v0A) << ','
        << to_string(r.choice) << ',' << opt(r.rt) << ',' << opt(r.vb) << ',' << opt(r.ax) << ','
        << opt(r.ay) << ',' << (r.collided ? 1 : 0) << '\n';
  }
}

inline void save_trials(const std::filesystem::path& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_trials(out, records);
}

}  // namespace ddmdrive
