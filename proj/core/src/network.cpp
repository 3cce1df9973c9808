#include "resonet/network.hpp"

#include <cmath>
#include <stdexcept>

namespace resonet {

void check_line_params(const line_params& lp) {
  if (!(lp.z0 > 0.0))
    throw std::invalid_argument("invalid-line-params: z0 must be positive");
  if (!(lp.alpha >= 0.0))
    throw std::invalid_argument("invalid-line-params: alpha must be non-negative");
  if (!(lp.v_p > 0.0))
    throw std::invalid_argument("invalid-line-params: v_p must be positive");
  if (!(lp.length >= 0.0))
    throw std::invalid_argument("invalid-line-params: length must be non-negative");
}

static void check_omega(double omega) {
  if (!(omega > 0.0))
    throw std::invalid_argument("invalid-frequency: omega must be positive");
}

cplx propagation_constant(const line_params& lp, double omega) {
  return {lp.alpha, omega / lp.v_p};
}

abcd_matrix operator*(const abcd_matrix& m, const abcd_matrix& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

two_port_element two_port_element::through(std::string label) {
  two_port_element e;
  e.kind = kind_t::through;
  e.label = std::move(label);
  return e;
}

two_port_element two_port_element::series(std::function<cplx(double)> z, std::string label) {
  two_port_element e;
  e.kind = kind_t::series_impedance;
  e.z = std::move(z);
  e.label = std::move(label);
  return e;
}

two_port_element two_port_element::series_const(cplx z, std::string label) {
  return series([z](double) { return z; }, std::move(label));
}

two_port_element two_port_element::shunt(std::function<cplx(double)> z, std::string label) {
  two_port_element e;
  e.kind = kind_t::shunt_impedance;
  e.z = std::move(z);
  e.label = std::move(label);
  return e;
}

two_port_element two_port_element::shunt_const(cplx z, std::string label) {
  return shunt([z](double) { return z; }, std::move(label));
}

two_port_element two_port_element::segment(line_params lp, std::string label) {
  check_line_params(lp);
  two_port_element e;
  e.kind = kind_t::line_segment;
  e.line = lp;
  e.label = std::move(label);
  return e;
}

two_port_element two_port_element::capacitor(double c, std::string label) {
  if (!(c > 0.0))
    throw std::invalid_argument("invalid-capacitor: capacitance must be positive");
  two_port_element e;
  e.kind = kind_t::series_capacitor;
  e.cap = c;
  e.label = std::move(label);
  return e;
}

abcd_matrix element_abcd(const two_port_element& elem, double omega) {
  check_omega(omega);
  switch (elem.kind) {
  case two_port_element::kind_t::through:
    return {};
  case two_port_element::kind_t::series_impedance: {
    if (!elem.z)
      throw std::invalid_argument("invalid-element: series impedance function missing");
    return {1.0, elem.z(omega), 0.0, 1.0};
  }
  case two_port_element::kind_t::shunt_impedance: {
    if (!elem.z)
      throw std::invalid_argument("invalid-element: shunt impedance function missing");
    const cplx zv = elem.z(omega);
    if (zv == cplx{0.0, 0.0})
      throw std::runtime_error("singular-element: shunt impedance is exactly zero");
    return {1.0, 0.0, 1.0 / zv, 1.0};
  }
  case two_port_element::kind_t::line_segment: {
    check_line_params(elem.line);
    const cplx gl = propagation_constant(elem.line, omega) * elem.line.length;
    const cplx ch = std::cosh(gl);
    const cplx sh = std::sinh(gl);
    return {ch, elem.line.z0 * sh, sh / elem.line.z0, ch};
  }
  case two_port_element::kind_t::series_capacitor: {
    if (!(elem.cap > 0.0))
      throw std::invalid_argument("invalid-capacitor: capacitance must be positive");
    return {1.0, cplx{0.0, -1.0} / (omega * elem.cap), 0.0, 1.0};
  }
  }
  throw std::invalid_argument("invalid-element: unknown element kind");
}

abcd_matrix cascade(const std::vector<two_port_element>& elems, double omega) {
  if (elems.empty())
    throw std::invalid_argument("empty-chain: cascade needs at least one element");
  abcd_matrix acc = element_abcd(elems.front(), omega);
  for (std::size_t i = 1; i < elems.size(); ++i)
    acc = acc * element_abcd(elems[i], omega);
  return acc;
}

s_matrix abcd_to_s(const abcd_matrix& m, double z0) {
  if (!(z0 > 0.0))
    throw std::invalid_argument("invalid-reference-impedance: z0 must be positive");
  const cplx den = m.a + m.b / z0 + m.c * z0 + m.d;
  if (std::abs(den) < 1e-300)
    throw std::runtime_error("singular-network: abcd-to-s denominator vanished");
  s_matrix s;
  s.s11 = (m.a + m.b / z0 - m.c * z0 - m.d) / den;
  s.s12 = 2.0 * (m.a * m.d - m.b * m.c) / den;
  s.s21 = 2.0 / den;
  s.s22 = (-m.a + m.b / z0 - m.c * z0 + m.d) / den;
  return s;
}

cplx line_input_impedance(cplx z_load, const line_params& line, double omega,
                          bool open) {
  check_line_params(line);
  check_omega(omega);
  const cplx gl = propagation_constant(line, omega) * line.length;
  const cplx th = std::tanh(gl);
  cplx z;
  if (open) {
    z = line.z0 / th;
  } else {
    z = line.z0 * (z_load + line.z0 * th) / (line.z0 + z_load * th);
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    return {1e30, 0.0}; // effectively open
  return z;
}

double resonance_omega0(resonator_kind kind, const line_params& line) {
  check_line_params(line);
  if (!(line.length > 0.0))
    throw std::invalid_argument("invalid-line-params: resonator length must be positive");
  switch (kind) {
  case resonator_kind::short_quarter:
    return pi * line.v_p / (2.0 * line.length);
  case resonator_kind::short_half:
  case resonator_kind::open_half:
    return pi * line.v_p / line.length;
  }
  throw std::invalid_argument("invalid-resonator-kind");
}

resonator_impedance resonator_input_impedance(resonator_kind kind,
                                              const line_params& line,
                                              double omega) {
  check_omega(omega);
  const double w0 = resonance_omega0(kind, line);
  const double delta = omega - w0;
  if (!(std::abs(delta) / w0 < 0.1))
    throw std::runtime_error(
        "out-of-band: detuning exceeds 10% of omega0, use line_input_impedance");
  const double al = line.alpha * line.length;
  switch (kind) {
  case resonator_kind::short_quarter:
    return {line.z0 / cplx{al, pi * delta / (2.0 * w0)}, w0};
  case resonator_kind::short_half:
    return {line.z0 * cplx{al, pi * delta / w0}, w0};
  case resonator_kind::open_half:
    return {line.z0 / cplx{al, pi * delta / w0}, w0};
  }
  throw std::invalid_argument("invalid-resonator-kind");
}

rlc_params rlc_equivalent(resonator_kind kind, const line_params& line) {
  const double w0 = resonance_omega0(kind, line);
  const double al = line.alpha * line.length;
  rlc_params p;
  p.q_i = w0 / (2.0 * line.alpha * line.v_p); // beta/(2 alpha) at omega0
  switch (kind) {
  case resonator_kind::short_quarter:
    p.topology = rlc_topology::parallel;
    p.r = line.z0 / al;
    p.c = pi / (4.0 * w0 * line.z0);
    p.l = 1.0 / (w0 * w0 * p.c);
    return p;
  case resonator_kind::open_half:
    p.topology = rlc_topology::parallel;
    p.r = line.z0 / al;
    p.c = pi / (2.0 * w0 * line.z0);
    p.l = 1.0 / (w0 * w0 * p.c);
    return p;
  case resonator_kind::short_half:
    p.topology = rlc_topology::series;
    p.r = line.z0 * al;
    p.l = pi * line.z0 / (2.0 * w0);
    p.c = 1.0 / (w0 * w0 * p.l);
    return p;
  }
  throw std::invalid_argument("invalid-resonator-kind");
}

} // namespace resonet
