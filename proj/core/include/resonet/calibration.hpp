#pragma once

#include "resonet/scenario.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace resonet {

// maps into (-pi, pi]
double wrap_pi(double x);

struct circle_fit {
  cplx center{};
  double radius = 0.0;
  double rms_residual = 0.0;
};

struct lorentzian_fit {
  double omega_r0 = 0.0; // rad/s
  double fwhm = 0.0;     // rad/s, |S|-shape full width at half depth
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
  double cost = 0.0;
  int iters = 0;
};

struct linear_phase_fit {
  double tau0 = 0.0;    // s
  double varphi1 = 0.0; // rad
};

struct delay_fit {
  double tau = 0.0; // s
  circle_fit circle;
  trace corrected; // S1 = S exp(j omega tau)
};

struct phase_fit {
  double varphi2 = 0.0; // rad, as fitted (unwrapped branch)
  double omega_r = 0.0; // rad/s
  double q_l = 0.0;     // |fitted|
  double q_l_signed = 0.0;
  double cost = 0.0;
  int iters = 0;
  bool converged = false;
};

enum class geometry_class_t { reflection_necklace, transmission_hanger };
enum class phase_reference_t { centered, raw };

geometry_class_t geometry_class_from_name(std::string_view name);
const char* geometry_class_name(geometry_class_t gc);

struct pipeline_options {
  double window_k = 4.0; // 3..5 half-widths of the fitted FWHM
  geometry_class_t geometry_class = geometry_class_t::reflection_necklace;
  // phase model reference: angle about the fitted circle center (default) or
  // the raw arg S1
  phase_reference_t phase_reference = phase_reference_t::centered;
  bool keep_stage_snapshots = false;
};

struct stage_log {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double residual = 0.0;
  trace snapshot; // empty unless keep_stage_snapshots
};

struct truth_errors {
  double omega_r = 0.0; // all relative magnitudes
  double q_l = 0.0;
  double q_i = 0.0;
  double q_c = 0.0;
};

struct fit_report {
  double omega_r = 0.0; // rad/s
  double q_l = 0.0;
  double q_i = 0.0;
  double q_c = 0.0;
  double tau = 0.0;     // s
  double phi = 0.0;     // rad
  double varphi1 = 0.0; // rad
  double varphi2 = 0.0; // rad, wrapped into (-pi, pi]
  cplx s_off{};
  circle_fit circle; // after asymmetry correction
  bool asym_warning = false;
  int n_window = 0;
  std::vector<stage_log> stages;
  std::optional<truth_errors> truth_rel;
};

std::vector<double> unwrap_phase(const trace& t);

linear_phase_fit fit_linear_phase(const trace& t);

lorentzian_fit fit_lorentzian(const trace& t);

trace select_window(const trace& t, double omega_r0, double fwhm, double k = 4.0);

circle_fit fit_circle(const std::vector<cplx>& points);

delay_fit refine_delay(const trace& t, double tau0);

struct phase_fit_init {
  cplx center{};        // circle center for the centered reference
  double omega_r0 = 0.0;
  double q_l0 = 0.0;    // magnitude; slope sign decides the starting sign
  phase_reference_t reference = phase_reference_t::centered;
};

phase_fit fit_phase_vs_frequency(const trace& t, const phase_fit_init& init);

// S_r = center + radius exp(j varphi2); s_off = 2 center - S_r; S2 = S1/s_off
std::pair<trace, cplx> normalize_off_resonant(const trace& t, const circle_fit& circle,
                                              double varphi2);

struct asymmetry_correction {
  trace corrected; // S3 = cos(phi) (S2 - 1) exp(-j phi) + 1
  double phi = 0.0;
  bool warning = false; // |phi| > pi/4
};

asymmetry_correction correct_asymmetry(const trace& t, const circle_fit& circle_after_norm);

// q_c = q_l/(2 r); q_i from 1/q_i = 1/q_l - 1/q_c
std::pair<double, double> extract_q(const circle_fit& circle_final, double q_l,
                                    geometry_class_t geometry_class); // (q_i, q_c)

fit_report run_pipeline(const trace& t, const pipeline_options& options = {},
                        const derived_params* truth = nullptr);

} // namespace resonet
