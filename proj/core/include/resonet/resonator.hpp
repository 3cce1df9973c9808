#pragma once

#include "resonet/network.hpp"

#include <optional>
#include <string_view>

namespace resonet {

enum class geometry {
  hanger_quarter,
  hanger_half,
  necklace_half,
  necklace_quarter, // reflection-only single-port device
  bridge_half,
};

bool single_port(geometry g);
bool has_second_coupler(geometry g); // necklace/bridge lambda/2
resonator_kind bare_resonator_kind(geometry g);
const char* geometry_name(geometry g);
geometry geometry_from_name(std::string_view name);

struct coupling_spec {
  double c1 = 0.0;          // F
  std::optional<double> c2; // F, absent for single-coupler geometries

  // omega0 * Ck * z0 < 0.1 for every present capacitor
  bool small_coupling(double z0, double omega0) const;
};

struct asymmetry_spec {
  std::function<cplx(double)> dz1; // ohm vs omega
  std::function<cplx(double)> dz2;

  static asymmetry_spec none();
  static asymmetry_spec fixed(cplx dz1, cplx dz2);
  // dZk(omega) = rk + j omega lk
  static asymmetry_spec series_rl(double r1, double l1, double r2, double l2);

  cplx z1(double z0, double omega) const; // 1 + dz1/z0
  cplx z2(double z0, double omega) const;

  // |dZk(omega)|/z0 < 0.5 for both ports
  bool small_asymmetry(double z0, double omega) const;
};

struct derived_params {
  geometry geom = geometry::necklace_half;
  double z0 = 50.0;
  double omega0 = 0.0;  // bare-line fundamental, rad/s
  double omega_r = 0.0; // capacitively shifted resonance, rad/s
  // per-port effective coupling factors 1/Re(1/Q'_ck); +inf when a port has
  // no coupler.  In the symmetric case these equal the plain Q_ck.
  double q_c_1 = 0.0;
  double q_c_2 = 0.0;
  double q_c = 0.0; // combined: 1/q_c = 1/q_c_1 + 1/q_c_2
  double q_i = 0.0;
  double q_l = 0.0;
  double phi1 = 0.0; // asymmetry rotation angles, rad
  double phi2 = 0.0;
  double phi = 0.0; // (phi1 + phi2)/2
  bool asym_small = true; // |dZk|/z0 < 0.5 held at omega_r

  double delta(double omega) const { return (omega - omega_r) / omega_r; }
  double delta0(double omega) const { return omega - omega0; }
};

// omega_r and coupling factors from the small-coupling expansion; throws
// approximation-invalid when omega0*Ck*z0 >= 0.1
derived_params derive_params(geometry geom, const line_params& line,
                             const coupling_spec& coupling);

// ideal near-resonance line shape for one scattering coefficient; ports are
// 1-based, necklace-lambda/4 exposes only (1,1)
cplx analytic_s(geometry geom, const derived_params& p, int out_port,
                int in_port, double omega);

// tilts the coupling factors by the port impedance mismatches evaluated at
// omega_ref; throws asymmetry-too-large when Re(Q'_c) <= 0
derived_params asymmetric_params(const derived_params& base,
                                 const asymmetry_spec& asym, double omega_ref);

struct line_shape_params {
  double amp = 1.0;     // A
  double tau = 0.0;     // s
  double varphi = 0.0;  // constant phase offset, rad
  double phi = 0.0;     // asymmetry rotation, rad
  double omega_r = 0.0; // rad/s
  double q_l = 0.0;
  double q_c = 0.0; // modulus convention |Q'_c|
};

// S = A exp(-j(omega tau + varphi)) (1 - e^{j phi} (q_l/q_c)/(1 + 2j q_l (omega/omega_r - 1)))
cplx general_model_s(const line_shape_params& p, double omega);

// closed-form scattering of the full circuit: exponential form for the
// symmetric necklace, quarter-wave-stub form for the symmetric bridge,
// z1/z2 linearized forms when an asymmetry is given.  necklace-lambda/2 and
// bridge-lambda/2 only.
s_matrix exact_scattering(geometry geom, const line_params& line,
                          const coupling_spec& coupling,
                          const asymmetry_spec* asym, double omega);

struct harmonic_pair {
  double q_ni = 0.0;
  double q_nc = 0.0;
};

// ideal harmonic scaling: q_ni = n q_i, q_nc = q_c / n
harmonic_pair harmonic_q(int n, double q_i_fundamental, double q_c_fundamental);

} // namespace resonet
