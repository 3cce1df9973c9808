#include "resonet/resonator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace resonet {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
const cplx jay{0.0, 1.0};

void need_positive_omega(double omega) {
  if (!(omega > 0.0))
    throw std::invalid_argument("invalid-frequency: omega must be positive");
}

cplx eval_dz(const std::function<cplx(double)>& fn, double omega) {
  return fn ? fn(omega) : cplx{0.0, 0.0};
}

double inv_or_zero(double q) { return std::isfinite(q) ? 1.0 / q : 0.0; }

} // namespace

bool single_port(geometry g) { return g == geometry::necklace_quarter; }

bool has_second_coupler(geometry g) {
  return g == geometry::necklace_half || g == geometry::bridge_half;
}

resonator_kind bare_resonator_kind(geometry g) {
  switch (g) {
  case geometry::hanger_quarter:
    return resonator_kind::short_quarter;
  case geometry::hanger_half:
    return resonator_kind::open_half;
  case geometry::necklace_half:
  case geometry::bridge_half:
    return resonator_kind::open_half;
  case geometry::necklace_quarter:
    return resonator_kind::short_quarter;
  }
  throw std::invalid_argument("invalid-geometry: unknown kind");
}

const char* geometry_name(geometry g) {
  switch (g) {
  case geometry::hanger_quarter:
    return "hanger-quarter";
  case geometry::hanger_half:
    return "hanger-half";
  case geometry::necklace_half:
    return "necklace-half";
  case geometry::necklace_quarter:
    return "necklace-quarter";
  case geometry::bridge_half:
    return "bridge-half";
  }
  throw std::invalid_argument("invalid-geometry: unknown kind");
}

geometry geometry_from_name(std::string_view name) {
  if (name == "hanger-quarter")
    return geometry::hanger_quarter;
  if (name == "hanger-half")
    return geometry::hanger_half;
  if (name == "necklace-half")
    return geometry::necklace_half;
  if (name == "necklace-quarter")
    return geometry::necklace_quarter;
  if (name == "bridge-half")
    return geometry::bridge_half;
  throw std::invalid_argument("invalid-geometry: unknown name '" + std::string(name) + "'");
}

bool coupling_spec::small_coupling(double z0, double omega0) const {
  if (omega0 * c1 * z0 >= 0.1)
    return false;
  if (c2 && omega0 * *c2 * z0 >= 0.1)
    return false;
  return true;
}

asymmetry_spec asymmetry_spec::none() {
  asymmetry_spec a;
  a.dz1 = [](double) { return cplx{0.0, 0.0}; };
  a.dz2 = [](double) { return cplx{0.0, 0.0}; };
  return a;
}

asymmetry_spec asymmetry_spec::fixed(cplx dz1, cplx dz2) {
  asymmetry_spec a;
  a.dz1 = [dz1](double) { return dz1; };
  a.dz2 = [dz2](double) { return dz2; };
  return a;
}

asymmetry_spec asymmetry_spec::series_rl(double r1, double l1, double r2, double l2) {
  asymmetry_spec a;
  a.dz1 = [r1, l1](double w) { return cplx{r1, w * l1}; };
  a.dz2 = [r2, l2](double w) { return cplx{r2, w * l2}; };
  return a;
}

cplx asymmetry_spec::z1(double z0, double omega) const {
  return 1.0 + eval_dz(dz1, omega) / z0;
}

cplx asymmetry_spec::z2(double z0, double omega) const {
  return 1.0 + eval_dz(dz2, omega) / z0;
}

bool asymmetry_spec::small_asymmetry(double z0, double omega) const {
  return std::abs(eval_dz(dz1, omega)) / z0 < 0.5 &&
         std::abs(eval_dz(dz2, omega)) / z0 < 0.5;
}

derived_params derive_params(geometry geom, const line_params& line,
                             const coupling_spec& coupling) {
  check_line_params(line);
  if (!(line.length > 0.0))
    throw std::invalid_argument("invalid-line-params: resonator length must be positive");
  if (coupling.c1 < 0.0 || (coupling.c2 && *coupling.c2 < 0.0))
    throw std::invalid_argument("invalid-coupling: capacitances must be non-negative");
  const bool two_caps = has_second_coupler(geom);
  if (two_caps && !coupling.c2)
    throw std::invalid_argument("invalid-coupling: c2 required for this geometry");
  if (!two_caps && coupling.c2)
    throw std::invalid_argument("invalid-coupling: c2 not applicable for this geometry");

  const double w0 = resonance_omega0(bare_resonator_kind(geom), line);
  if (!coupling.small_coupling(line.z0, w0))
    throw std::runtime_error(
        "approximation-invalid: omega0*C*z0 must stay below 0.1");

  const double z0 = line.z0;
  const double c1 = coupling.c1;
  const double c2 = two_caps ? *coupling.c2 : 0.0;

  derived_params p;
  p.geom = geom;
  p.z0 = z0;
  p.omega0 = w0;
  p.q_i = w0 / (2.0 * line.alpha * line.v_p); // beta/(2 alpha), inf for alpha=0

  double wr = w0;
  double qc1 = inf;
  double qc2 = inf;
  switch (geom) {
  case geometry::hanger_quarter:
    wr = w0 - 2.0 * z0 * c1 * w0 * w0 / pi;
    if (c1 > 0.0)
      qc1 = pi / (2.0 * wr * wr * z0 * z0 * c1 * c1);
    break;
  case geometry::hanger_half:
    wr = w0 - z0 * c1 * w0 * w0 / pi;
    if (c1 > 0.0)
      qc1 = pi / (wr * wr * z0 * z0 * c1 * c1);
    break;
  case geometry::necklace_half:
  case geometry::bridge_half:
    wr = w0 - z0 * (c1 + c2) * w0 * w0 / pi;
    if (c1 > 0.0)
      qc1 = pi / (2.0 * wr * wr * z0 * z0 * c1 * c1);
    if (c2 > 0.0)
      qc2 = pi / (2.0 * wr * wr * z0 * z0 * c2 * c2);
    break;
  case geometry::necklace_quarter:
    wr = w0 - 2.0 * z0 * c1 * w0 * w0 / pi;
    if (c1 > 0.0)
      qc1 = pi / (4.0 * wr * wr * z0 * z0 * c1 * c1);
    break;
  }
  p.omega_r = wr;
  p.q_c_1 = qc1;
  p.q_c_2 = qc2;
  const double inv_qc = inv_or_zero(qc1) + inv_or_zero(qc2);
  p.q_c = inv_qc > 0.0 ? 1.0 / inv_qc : inf;
  const double inv_ql = inv_or_zero(p.q_i) + inv_qc;
  p.q_l = inv_ql > 0.0 ? 1.0 / inv_ql : inf;
  return p;
}

cplx analytic_s(geometry geom, const derived_params& p, int out_port,
                int in_port, double omega) {
  need_positive_omega(omega);
  if (out_port < 1 || out_port > 2 || in_port < 1 || in_port > 2)
    throw std::invalid_argument("invalid-port: ports are numbered 1 and 2");
  if (single_port(geom) && (out_port == 2 || in_port == 2))
    throw std::runtime_error("no-such-port: this geometry is reflection-only");

  const cplx den = 1.0 + 2.0 * jay * p.q_l * p.delta(omega);
  // modulus |Q'_ck| recovered from the stored effective value
  const double m1 = p.q_c_1 * std::cos(p.phi1);
  const double m2 = p.q_c_2 * std::cos(p.phi2);

  switch (geom) {
  case geometry::hanger_quarter:
  case geometry::hanger_half: {
    const double mc = p.q_c * std::cos(p.phi);
    const double ratio = std::isfinite(mc) ? p.q_l / mc : 0.0;
    const cplx dip = std::exp(jay * p.phi) * ratio / den;
    const bool transmission = out_port != in_port;
    return transmission ? 1.0 - dip : -dip;
  }
  case geometry::necklace_quarter: {
    const double ratio = std::isfinite(m1) ? 2.0 * p.q_l / m1 : 0.0;
    return 1.0 - std::exp(jay * p.phi1) * ratio / den;
  }
  case geometry::necklace_half:
  case geometry::bridge_half: {
    if (out_port == in_port) {
      const double mk = in_port == 1 ? m1 : m2;
      const double phik = in_port == 1 ? p.phi1 : p.phi2;
      const double ratio = std::isfinite(mk) ? 2.0 * p.q_l / mk : 0.0;
      return 1.0 - std::exp(jay * phik) * ratio / den;
    }
    const double cross = std::sqrt(m1 * m2);
    const double ratio = std::isfinite(cross) ? 2.0 * p.q_l / cross : 0.0;
    const cplx s21 = std::exp(jay * p.phi) * ratio / den;
    return geom == geometry::bridge_half ? -s21 : s21;
  }
  }
  throw std::invalid_argument("invalid-geometry: unknown kind");
}

derived_params asymmetric_params(const derived_params& base,
                                 const asymmetry_spec& asym, double omega_ref) {
  need_positive_omega(omega_ref);
  derived_params p = base;
  p.asym_small = asym.small_asymmetry(base.z0, omega_ref);

  const auto effective = [](cplx q_prime) {
    if (!(q_prime.real() > 0.0))
      throw std::runtime_error(
          "asymmetry-too-large: tilted coupling factor has non-positive real part");
    const double phik = -std::atan(q_prime.imag() / q_prime.real());
    const double q_eff = std::norm(q_prime) / q_prime.real(); // 1/Re(1/Q')
    return std::pair<double, double>{q_eff, phik};
  };

  switch (base.geom) {
  case geometry::hanger_quarter:
  case geometry::hanger_half: {
    const double mc = base.q_c * std::cos(base.phi);
    if (std::isfinite(mc)) {
      const cplx zr1 = base.z0 + eval_dz(asym.dz1, omega_ref);
      const cplx zr2 = base.z0 + eval_dz(asym.dz2, omega_ref);
      const cplx qp = mc * base.z0 * (1.0 / zr1 + 1.0 / zr2) / 2.0;
      auto [q_eff, phik] = effective(qp);
      p.q_c = q_eff;
      p.q_c_1 = q_eff;
      p.phi = p.phi1 = p.phi2 = phik;
    }
    break;
  }
  case geometry::necklace_quarter: {
    const double m1 = base.q_c_1 * std::cos(base.phi1);
    if (std::isfinite(m1)) {
      const cplx qp1 = m1 / asym.z1(base.z0, omega_ref);
      auto [q_eff, phik] = effective(qp1);
      p.q_c_1 = q_eff;
      p.q_c = q_eff;
      p.phi1 = p.phi2 = p.phi = phik;
    }
    break;
  }
  case geometry::necklace_half:
  case geometry::bridge_half: {
    const double m1 = base.q_c_1 * std::cos(base.phi1);
    const double m2 = base.q_c_2 * std::cos(base.phi2);
    if (std::isfinite(m1)) {
      auto [q_eff, phik] = effective(m1 / asym.z1(base.z0, omega_ref));
      p.q_c_1 = q_eff;
      p.phi1 = phik;
    }
    if (std::isfinite(m2)) {
      auto [q_eff, phik] = effective(m2 / asym.z2(base.z0, omega_ref));
      p.q_c_2 = q_eff;
      p.phi2 = phik;
    }
    p.phi = (p.phi1 + p.phi2) / 2.0;
    break;
  }
  }

  const double inv_qc = inv_or_zero(p.q_c_1) + inv_or_zero(p.q_c_2);
  if (has_second_coupler(base.geom))
    p.q_c = inv_qc > 0.0 ? 1.0 / inv_qc : inf;
  const double inv_ql = inv_or_zero(p.q_i) + inv_or_zero(p.q_c);
  p.q_l = inv_ql > 0.0 ? 1.0 / inv_ql : inf;
  return p;
}

cplx general_model_s(const line_shape_params& p, double omega) {
  need_positive_omega(omega);
  const cplx den = 1.0 + 2.0 * jay * p.q_l * (omega / p.omega_r - 1.0);
  const cplx dip = std::exp(jay * p.phi) * (p.q_l / p.q_c) / den;
  return p.amp * std::exp(-jay * (omega * p.tau + p.varphi)) * (1.0 - dip);
}

s_matrix exact_scattering(geometry geom, const line_params& line,
                          const coupling_spec& coupling,
                          const asymmetry_spec* asym, double omega) {
  if (geom != geometry::necklace_half && geom != geometry::bridge_half)
    throw std::runtime_error(
        "unsupported-geometry: closed forms cover necklace-lambda/2 and bridge-lambda/2 only");
  check_line_params(line);
  if (!(line.length > 0.0))
    throw std::invalid_argument("invalid-line-params: resonator length must be positive");
  need_positive_omega(omega);
  if (!coupling.c2)
    throw std::invalid_argument("invalid-coupling: c2 required for this geometry");
  const double cf1 = coupling.c1;
  const double cf2 = *coupling.c2;
  if (!(cf1 > 0.0) || !(cf2 > 0.0))
    throw std::invalid_argument("invalid-coupling: closed forms need positive capacitances");

  const double z0 = line.z0;
  const double w = omega;
  const double w0 = pi * line.v_p / line.length;
  const double al = line.alpha * line.length;

  s_matrix s;
  if (geom == geometry::necklace_half) {
    if (!asym) {
      const cplx gl = propagation_constant(line, w) * line.length;
      const cplx ep = std::exp(gl);
      const cplx em = std::exp(-gl);
      const cplx k1 = 2.0 * jay * w * z0 * cf1;
      const cplx k2 = 2.0 * jay * w * z0 * cf2;
      const cplx den = (k1 + 1.0) * (k2 + 1.0) * ep - em;
      s.s11 = ((k2 + 1.0) * ep + (k1 - 1.0) * em) / den;
      s.s21 = -4.0 * w * w * z0 * z0 * cf1 * cf2 / den;
      s.s22 = ((k1 + 1.0) * ep + (k2 - 1.0) * em) / den;
    } else {
      const cplx zz1 = asym->z1(z0, w);
      const cplx zz2 = asym->z2(z0, w);
      const double c1 = z0 * cf1;
      const double c2 = z0 * cf2;
      const cplx sv = cplx{al, pi * (w - w0) / w0};
      const cplx den = (-(zz1 + zz2) * w * w * c1 * c2 + jay * w * (c1 + c2)) +
                       sv * (-zz1 * zz2 * w * w * c1 * c2 +
                             jay * w * (zz1 * c1 + zz2 * c2) + 1.0 - w * w * c1 * c2);
      const cplx lead =
          -w * w * c1 * c2 * (zz1 + zz2 - 2.0) + jay * w * (c1 + c2);
      const cplx n11 =
          lead + sv * (-w * w * c1 * c2 * zz1 * zz2 +
                       jay * w * (c1 * zz1 + c2 * zz2) + 1.0 -
                       w * w * c1 * c2 * (1.0 - 2.0 * zz2) - 2.0 * jay * w * c1);
      const cplx n22 =
          lead + sv * (-w * w * c1 * c2 * zz1 * zz2 +
                       jay * w * (c1 * zz1 + c2 * zz2) + 1.0 -
                       w * w * c1 * c2 * (1.0 - 2.0 * zz1) - 2.0 * jay * w * c2);
      s.s11 = n11 / den;
      s.s21 = 2.0 * w * w * c1 * c2 / den;
      s.s22 = n22 / den;
    }
  } else { // bridge_half
    const cplx u = cplx{al / 2.0, pi * (w - w0) / (2.0 * w0)};
    if (!asym) {
      const double wwc = w * w * cf1 * cf2 * z0 * z0;
      const cplx jws = jay * w * (cf1 + cf2) * z0;
      const cplx den = (-2.0 * wwc + jws) + 2.0 * u * (1.0 + jws - wwc);
      s.s11 = (jws + 2.0 * u * (1.0 + jay * w * (cf2 - cf1) * z0 + wwc)) / den;
      s.s21 = -2.0 * wwc / den;
      s.s22 = (jws + 2.0 * u * (1.0 + jay * w * (cf1 - cf2) * z0 + wwc)) / den;
    } else {
      const cplx zz1 = asym->z1(z0, w);
      const cplx zz2 = asym->z2(z0, w);
      const double c1 = z0 * cf1;
      const double c2 = z0 * cf2;
      const cplx den = (jay * w * (c1 + c2) - w * w * c1 * c2 * (zz1 + zz2)) +
                       2.0 * u * (1.0 + jay * w * (c1 * zz1 + c2 * zz2) -
                                  w * w * c1 * c2 * zz1 * zz2);
      const cplx n11 =
          (jay * w * (c1 + c2) - w * w * c1 * c2 * (zz1 + zz2 - 2.0)) +
          2.0 * u * (1.0 + jay * w * (c1 * zz1 + c2 * zz2) -
                     w * w * c1 * c2 * zz1 * zz2 + 2.0 * w * w * c1 * c2 * zz2 -
                     2.0 * jay * w * c1);
      const cplx n22 =
          (jay * w * (c1 + c2) - w * w * c1 * c2 * (zz1 + zz2 - 2.0)) +
          2.0 * u * (1.0 + jay * w * (c1 * zz1 + c2 * zz2) -
                     w * w * c1 * c2 * zz1 * zz2 + 2.0 * w * w * c1 * c2 * zz1 -
                     2.0 * jay * w * c2);
      s.s11 = n11 / den;
      s.s21 = -2.0 * w * w * c1 * c2 / den;
      s.s22 = n22 / den;
    }
  }
  s.s12 = s.s21;
  return s;
}

harmonic_pair harmonic_q(int n, double q_i_fundamental, double q_c_fundamental) {
  if (n < 1)
    throw std::invalid_argument("invalid-harmonic-index: n must be a positive integer");
  if (!(q_i_fundamental > 0.0) || !(q_c_fundamental > 0.0))
    throw std::invalid_argument("invalid-quality-factor: fundamentals must be positive");
  return {static_cast<double>(n) * q_i_fundamental, q_c_fundamental / n};
}

} // namespace resonet
