#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thpsim/attack_engine.hpp"
#include "thpsim/protocol_sim.hpp"

namespace thpsim {

// JSON carries full double precision; CSV rows use 6 significant digits.

std::string sim_result_to_json(const SimResult& r);
SimResult sim_result_from_json(const std::string& text);

std::string combination_to_json(const AttackCombination& c);
AttackCombination combination_from_json(const std::string& text);

std::string report_to_json(const BreachReport& r);
BreachReport report_from_json(const std::string& text);

/// Ranked reports as a JSON array.
std::string reports_to_json(std::span<const BreachReport> reports);
std::vector<BreachReport> reports_from_json(const std::string& text);

std::string report_csv_header();
std::string report_csv_row(const BreachReport& r);
void write_reports_csv(std::ostream& out, std::span<const BreachReport> reports);

/// Parses a CSV written by write_reports_csv (6-digit values).
std::vector<BreachReport> read_reports_csv(std::istream& in);

/// Fixed 6-significant-digit formatting used by every text output.
std::string format6(double v);

}  // namespace thpsim
