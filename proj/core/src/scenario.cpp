#include "resonet/scenario.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace resonet {

namespace {

void check_sweep(const sweep_spec& sw) {
  if (!(sw.f_start > 0.0) || !(sw.f_stop > sw.f_start))
    throw std::invalid_argument("invalid-sweep: need 0 < f_start < f_stop");
  if (sw.n_points < 16)
    throw std::invalid_argument("invalid-sweep: need at least 16 points");
}

void apply_noise(trace& t, std::mt19937_64& rng, std::normal_distribution<double>& dist) {
  for (cplx& v : t.values)
    v += cplx{dist(rng), dist(rng)};
}

} // namespace

line_params scenario::feed_line(int which) const {
  if (!feedlines)
    throw std::logic_error("invalid-feedline-request: scenario has no feedlines");
  line_params lp = feedlines->line ? *feedlines->line : line;
  lp.length = which == 1 ? feedlines->l1 : feedlines->l2;
  return lp;
}

scenario make_scenario(geometry geom, const line_params& line,
                       const coupling_spec& coupling,
                       std::optional<asym_rl> asymmetry,
                       std::optional<feedline_spec> feedlines,
                       std::optional<sweep_spec> sweep,
                       std::optional<noise_spec> noise) {
  scenario s;
  s.geom = geom;
  s.line = line;
  s.coupling = coupling;
  s.asymmetry = asymmetry;
  s.feedlines = feedlines;
  s.noise = noise;
  if (feedlines && (!(feedlines->l1 >= 0.0) || !(feedlines->l2 >= 0.0)))
    throw std::invalid_argument("invalid-feedline: lengths must be non-negative");
  if (noise && !(noise->sigma >= 0.0))
    throw std::invalid_argument("invalid-noise: sigma must be non-negative");

  const derived_params base = derive_params(geom, line, coupling);
  s.truth = asymmetry ? asymmetric_params(base, asymmetry->to_spec(), base.omega_r)
                      : base;

  if (sweep) {
    check_sweep(*sweep);
    s.sweep = *sweep;
  } else {
    const double f_r = s.truth.omega_r / (2.0 * pi);
    const double half_span = 25.0 * f_r / s.truth.q_l;
    s.sweep = {f_r - half_span, f_r + half_span, 4001};
    check_sweep(s.sweep);
  }
  return s;
}

std::vector<two_port_element> build_network(const scenario& s) {
  if (single_port(s.geom))
    throw std::runtime_error(
        "unsupported-scenario: no two-port circuit for a reflection-only geometry");

  std::vector<two_port_element> chain;
  const bool feeds = s.feedlines.has_value();
  if (feeds && s.feedlines->l1 > 0.0)
    chain.push_back(two_port_element::segment(s.feed_line(1), "feed1"));
  if (s.asymmetry) {
    const asym_rl a = *s.asymmetry;
    chain.push_back(two_port_element::series(
        [a](double w) { return cplx{a.r1, w * a.l1}; }, "dz1"));
  }

  const line_params res = s.line;
  switch (s.geom) {
  case geometry::hanger_quarter:
  case geometry::hanger_half: {
    const double c1 = s.coupling.c1;
    if (!(c1 > 0.0))
      throw std::invalid_argument("invalid-coupling: hanger circuit needs c1 > 0");
    const bool open_end = s.geom == geometry::hanger_half;
    chain.push_back(two_port_element::shunt(
        [res, c1, open_end](double w) {
          const cplx z_cap = cplx{0.0, -1.0} / (w * c1);
          return z_cap + line_input_impedance({0.0, 0.0}, res, w, open_end);
        },
        "coupler+resonator"));
    break;
  }
  case geometry::necklace_half: {
    if (!s.coupling.c2)
      throw std::invalid_argument("invalid-coupling: c2 required for this geometry");
    chain.push_back(two_port_element::capacitor(s.coupling.c1, "c1"));
    chain.push_back(two_port_element::segment(res, "resonator"));
    chain.push_back(two_port_element::capacitor(*s.coupling.c2, "c2"));
    break;
  }
  case geometry::bridge_half: {
    if (!s.coupling.c2)
      throw std::invalid_argument("invalid-coupling: c2 required for this geometry");
    line_params stub = res;
    stub.length = res.length / 2.0; // two shorted quarter-wave stubs in parallel
    chain.push_back(two_port_element::capacitor(s.coupling.c1, "c1"));
    chain.push_back(two_port_element::shunt(
        [stub](double w) {
          return line_input_impedance({0.0, 0.0}, stub, w) / 2.0;
        },
        "stub-pair"));
    chain.push_back(two_port_element::capacitor(*s.coupling.c2, "c2"));
    break;
  }
  case geometry::necklace_quarter:
    throw std::runtime_error("unsupported-scenario: unreachable");
  }

  if (s.asymmetry) {
    const asym_rl a = *s.asymmetry;
    chain.push_back(two_port_element::series(
        [a](double w) { return cplx{a.r2, w * a.l2}; }, "dz2"));
  }
  if (feeds && s.feedlines->l2 > 0.0)
    chain.push_back(two_port_element::segment(s.feed_line(2), "feed2"));
  return chain;
}

std::vector<trace> simulate_sweep(const scenario& s) {
  check_sweep(s.sweep);
  const std::vector<two_port_element> chain = build_network(s);

  const int n = s.sweep.n_points;
  std::vector<double> freq(n);
  const double step = (s.sweep.f_stop - s.sweep.f_start) / (n - 1);
  for (int i = 0; i < n; ++i)
    freq[i] = s.sweep.f_start + step * i;

  const double f_r = s.truth.omega_r / (2.0 * pi);
  const bool covers = s.sweep.f_start <= f_r && f_r <= s.sweep.f_stop;

  const char* names[4] = {"s11", "s21", "s12", "s22"};
  std::vector<trace> out(4);
  for (int k = 0; k < 4; ++k) {
    out[k].port_pair = names[k];
    out[k].freq_hz = freq;
    out[k].values.resize(n);
    out[k].covers_resonance = covers;
  }

  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * pi * freq[i];
    const s_matrix sm = abcd_to_s(cascade(chain, w), s.line.z0);
    const cplx vals[4] = {sm.s11, sm.s21, sm.s12, sm.s22};
    for (int k = 0; k < 4; ++k) {
      if (!std::isfinite(vals[k].real()) || !std::isfinite(vals[k].imag()))
        throw std::runtime_error("non-finite-sample: simulation produced NaN/Inf");
      out[k].values[i] = vals[k];
    }
  }

  if (s.noise && s.noise->sigma > 0.0) {
    std::mt19937_64 rng(s.noise->seed);
    std::normal_distribution<double> dist(0.0, s.noise->sigma);
    for (trace& t : out)
      apply_noise(t, rng, dist);
  }
  return out;
}

trace add_noise(const trace& t, const noise_spec& n) {
  if (!(n.sigma >= 0.0))
    throw std::invalid_argument("invalid-noise: sigma must be non-negative");
  trace out = t;
  if (n.sigma == 0.0)
    return out;
  std::mt19937_64 rng(n.seed);
  std::normal_distribution<double> dist(0.0, n.sigma);
  apply_noise(out, rng, dist);
  return out;
}

std::vector<std::pair<double, derived_params>>
sweep_parameter(const scenario& base, std::string_view param,
                const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("invalid-sweep: need at least one parameter value");
  std::vector<std::pair<double, derived_params>> out;
  out.reserve(values.size());
  for (double v : values) {
    line_params lp = base.line;
    coupling_spec cp = base.coupling;
    if (param == "c1")
      cp.c1 = v;
    else if (param == "c2")
      cp.c2 = v;
    else if (param == "alpha")
      lp.alpha = v;
    else if (param == "length")
      lp.length = v;
    else if (param == "v_p")
      lp.v_p = v;
    else if (param == "z0")
      lp.z0 = v;
    else
      throw std::invalid_argument(
          "invalid-sweep: unknown parameter '" + std::string(param) +
          "' (expected c1, c2, alpha, length, v_p, or z0)");
    const scenario varied = make_scenario(base.geom, lp, cp, base.asymmetry,
                                          base.feedlines, base.sweep, base.noise);
    out.emplace_back(v, varied.truth);
  }
  return out;
}

scenario reference_scenario() {
  const line_params res{50.0, 5.0e-3, 1.35e8, 1.0e-2};
  coupling_spec cp;
  cp.c1 = 1.0e-14;
  cp.c2 = 1.0e-14;
  const asym_rl asym{0.0, 1.0e-9, 2.0, 0.0};
  const feedline_spec feeds{1.2, 1.2, std::nullopt};
  scenario s = make_scenario(geometry::necklace_half, res, cp, asym, feeds);
  // six loaded linewidths to a side keeps the dip deep in the window while
  // the feedline phase winds slowly enough for the delay stages
  const double f_r = s.truth.omega_r / (2.0 * pi);
  const double lw = f_r / s.truth.q_l;
  s.sweep = {f_r - 6.0 * lw, f_r + 6.0 * lw, 4001};
  return s;
}

scenario hanger_quarter_scenario() {
  const line_params res{50.0, 5.0e-3, 1.35e8, 5.0e-3};
  coupling_spec cp;
  cp.c1 = 1.0e-14;
  return make_scenario(geometry::hanger_quarter, res, cp);
}

scenario necklace_half_scenario() {
  const line_params res{50.0, 5.0e-3, 1.35e8, 1.0e-2};
  coupling_spec cp;
  cp.c1 = 1.0e-14;
  cp.c2 = 1.0e-14;
  return make_scenario(geometry::necklace_half, res, cp);
}

scenario bridge_half_scenario() {
  const line_params res{50.0, 5.0e-3, 1.35e8, 1.0e-2};
  coupling_spec cp;
  cp.c1 = 1.0e-14;
  cp.c2 = 1.0e-14;
  return make_scenario(geometry::bridge_half, res, cp);
}

scenario scenario_preset(std::string_view name) {
  if (name == "reference")
    return reference_scenario();
  if (name == "hanger-quarter")
    return hanger_quarter_scenario();
  if (name == "necklace-half")
    return necklace_half_scenario();
  if (name == "bridge-half")
    return bridge_half_scenario();
  throw std::invalid_argument("invalid-preset: unknown name '" + std::string(name) + "'");
}

} // namespace resonet
