#pragma once

#include "resonet/resonator.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace resonet {

// serializable series R-L asymmetry: dZk(omega) = rk + j omega lk
struct asym_rl {
  double r1 = 0.0; // ohm
  double l1 = 0.0; // H
  double r2 = 0.0; // ohm
  double l2 = 0.0; // H

  asymmetry_spec to_spec() const { return asymmetry_spec::series_rl(r1, l1, r2, l2); }
  bool trivial() const { return r1 == 0.0 && l1 == 0.0 && r2 == 0.0 && l2 == 0.0; }
};

struct feedline_spec {
  double l1 = 0.0; // m
  double l2 = 0.0; // m
  // z0/alpha/v_p for the feedlines; absent means share the resonator line's
  std::optional<line_params> line;
};

struct sweep_spec {
  double f_start = 0.0; // Hz
  double f_stop = 0.0;  // Hz
  int n_points = 4001;  // linear spacing
};

struct noise_spec {
  double sigma = 0.0; // per-quadrature additive std
  std::uint64_t seed = 0xC0FFEE;
};

struct scenario {
  geometry geom = geometry::necklace_half;
  line_params line{};
  coupling_spec coupling{};
  std::optional<asym_rl> asymmetry;
  std::optional<feedline_spec> feedlines;
  sweep_spec sweep{};
  std::optional<noise_spec> noise;
  derived_params truth{}; // filled by make_scenario

  // resolved feedline params for port 1 or 2
  line_params feed_line(int which) const;
};

// validates, computes truth (including asymmetry tilt at omega_r) and, when
// no sweep is given, defaults to 4001 points over f_r +- 25 f_r/q_l
scenario make_scenario(geometry geom, const line_params& line,
                       const coupling_spec& coupling,
                       std::optional<asym_rl> asymmetry = {},
                       std::optional<feedline_spec> feedlines = {},
                       std::optional<sweep_spec> sweep = {},
                       std::optional<noise_spec> noise = {});

struct trace {
  std::string port_pair; // "s11" | "s21" | "s12" | "s22"
  std::vector<double> freq_hz;
  std::vector<cplx> values;
  bool covers_resonance = true;
};

// frequency-parametrized element chain for the scenario's circuit; throws
// unsupported-scenario for combinations without a two-port circuit model
std::vector<two_port_element> build_network(const scenario& s);

// one trace per scattering coefficient, in the order s11, s21, s12, s22;
// noise (if configured) is applied in that emission order from one generator
std::vector<trace> simulate_sweep(const scenario& s);

trace add_noise(const trace& t, const noise_spec& n);

// re-derives the scenario for each value of one physical parameter
// (c1 | c2 | alpha | length | v_p | z0), keeping everything else fixed
std::vector<std::pair<double, derived_params>>
sweep_parameter(const scenario& base, std::string_view param,
                const std::vector<double>& values);

scenario reference_scenario();
scenario hanger_quarter_scenario();
scenario necklace_half_scenario();
scenario bridge_half_scenario();

// by CLI name: reference | hanger-quarter | necklace-half | bridge-half
scenario scenario_preset(std::string_view name);

} // namespace resonet
