#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace resonet {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

struct line_params {
  double z0 = 50.0;    // characteristic impedance, ohm
  double alpha = 0.0;  // attenuation constant, 1/m
  double v_p = 1.0;    // phase velocity, m/s
  double length = 0.0; // m
};

// throws invalid-line-params unless z0 > 0, alpha >= 0, v_p > 0, length >= 0
void check_line_params(const line_params& lp);

// gamma = alpha + j omega / v_p
cplx propagation_constant(const line_params& lp, double omega);

struct abcd_matrix {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0}; // ohm
  cplx c{0.0, 0.0}; // siemens
  cplx d{1.0, 0.0};

  cplx det() const { return a * d - b * c; }
};

abcd_matrix operator*(const abcd_matrix& m, const abcd_matrix& n);

struct s_matrix {
  cplx s11{}, s12{}, s21{}, s22{};
};

struct two_port_element {
  enum class kind_t {
    through,
    series_impedance,
    shunt_impedance,
    line_segment,
    series_capacitor,
  };

  kind_t kind = kind_t::through;
  std::function<cplx(double)> z; // series/shunt impedance vs omega
  line_params line{};            // line_segment only
  double cap = 0.0;              // series_capacitor only, F
  std::string label;

  static two_port_element through(std::string label = "through");
  static two_port_element series(std::function<cplx(double)> z, std::string label = "series");
  static two_port_element series_const(cplx z, std::string label = "series");
  static two_port_element shunt(std::function<cplx(double)> z, std::string label = "shunt");
  static two_port_element shunt_const(cplx z, std::string label = "shunt");
  static two_port_element segment(line_params lp, std::string label = "line");
  static two_port_element capacitor(double c, std::string label = "cap");
};

// chain matrix of a single element at omega
abcd_matrix element_abcd(const two_port_element& elem, double omega);

// ordered left-to-right product over the chain
abcd_matrix cascade(const std::vector<two_port_element>& elems, double omega);

s_matrix abcd_to_s(const abcd_matrix& m, double z0);

// Z(l) = z0 (z_load + z0 tanh gl)/(z0 + z_load tanh gl); open=true ignores
// z_load and returns z0/tanh gl.  Overflow saturates to a large real value
// instead of NaN.
cplx line_input_impedance(cplx z_load, const line_params& line, double omega,
                          bool open = false);

enum class resonator_kind { short_quarter, short_half, open_half };

// fundamental resonance of the bare line
double resonance_omega0(resonator_kind kind, const line_params& line);

struct resonator_impedance {
  cplx z;
  double omega0;
};

// small-detuning input impedance near the fundamental; requires
// |omega - omega0| / omega0 < 0.1, else out-of-band
resonator_impedance resonator_input_impedance(resonator_kind kind,
                                              const line_params& line,
                                              double omega);

enum class rlc_topology { series, parallel };

struct rlc_params {
  double r = 0.0; // ohm
  double l = 0.0; // H
  double c = 0.0; // F
  rlc_topology topology = rlc_topology::parallel;
  double q_i = 0.0; // internal quality factor beta/(2 alpha) at omega0
};

rlc_params rlc_equivalent(resonator_kind kind, const line_params& line);

} // namespace resonet
