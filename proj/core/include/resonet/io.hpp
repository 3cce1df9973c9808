#pragma once

#include "resonet/calibration.hpp"
#include "resonet/scenario.hpp"

#include <string>
#include <vector>

namespace resonet {

// delimited trace files; header is freq_hz plus re_sXY,im_sXY pairs for any
// subset of s11, s21, s12, s22.  Values round-trip bit for bit.
std::vector<trace> read_trace_csv(const std::string& path);
trace read_trace_csv_port(const std::string& path, const std::string& port);
void write_trace_csv(const std::string& path, const std::vector<trace>& traces);

struct touchstone_data {
  double z0 = 50.0;
  std::vector<trace> traces; // s11, s21, s12, s22
};

// touchstone v1 two-port files (.s2p); RI/MA/DB formats, any frequency unit
touchstone_data read_touchstone(const std::string& path);

scenario parse_scenario_json(const std::string& text);
std::string scenario_to_json(const scenario& s);
scenario read_scenario_json(const std::string& path);
void write_scenario_json(const std::string& path, const scenario& s);

std::string report_to_json(const fit_report& rep);
void write_report_json(const std::string& path, const fit_report& rep);

} // namespace resonet
