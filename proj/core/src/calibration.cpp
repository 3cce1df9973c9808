#include "resonet/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace resonet {

namespace {

void check_trace_arg(const trace& t, std::size_t min_points = 1) {
  if (t.freq_hz.size() != t.values.size())
    throw std::invalid_argument("invalid-trace: frequency/value length mismatch");
  if (t.freq_hz.size() < min_points)
    throw std::invalid_argument("invalid-trace: too few points");
  for (std::size_t i = 0; i < t.freq_hz.size(); ++i) {
    if (!std::isfinite(t.freq_hz[i]) || !std::isfinite(t.values[i].real()) ||
        !std::isfinite(t.values[i].imag()))
      throw std::invalid_argument("invalid-trace: non-finite sample");
    if (i > 0 && !(t.freq_hz[i] > t.freq_hz[i - 1]))
      throw std::invalid_argument("invalid-trace: frequencies must be strictly increasing");
  }
}

std::vector<double> omega_of(const trace& t) {
  std::vector<double> w(t.freq_hz.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 2.0 * pi * t.freq_hz[i];
  return w;
}

// in-place sequential unwrap; differences end up in (-pi, pi]
std::vector<double> unwrap_angles(std::vector<double> ph) {
  for (std::size_t i = 1; i < ph.size(); ++i) {
    const double d = ph[i] - ph[i - 1];
    double dd = std::remainder(d, 2.0 * pi);
    if (dd <= -pi)
      dd += 2.0 * pi;
    ph[i] = ph[i - 1] + dd;
  }
  return ph;
}

std::vector<double> angles(const std::vector<cplx>& s) {
  std::vector<double> ph(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    ph[i] = std::arg(s[i]);
  return ph;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v)
    acc += x;
  return acc / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --- 3x3 symmetric eigen (cyclic Jacobi), eigenvalues ascending ---

void jacobi3(double a[3][3], double vals[3], double vecs[3][3]) {
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    const double dia = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]);
    if (off == 0.0 || off <= 1e-15 * (dia + off))
      break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0)
          continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double tn = (theta >= 0.0 ? 1.0 : -1.0) /
                          (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(tn * tn + 1.0);
        const double sn = tn * cs;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = cs * akp - sn * akq;
          a[k][q] = sn * akp + cs * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = cs * apk - sn * aqk;
          a[q][k] = sn * apk + cs * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = cs * vkp - sn * vkq;
          v[k][q] = sn * vkp + cs * vkq;
        }
      }
    }
  }
  int order[3] = {0, 1, 2};
  const double d[3] = {a[0][0], a[1][1], a[2][2]};
  std::sort(order, order + 3, [&](int i, int j) { return d[i] < d[j]; });
  for (int k = 0; k < 3; ++k) {
    vals[k] = d[order[k]];
    for (int i = 0; i < 3; ++i)
      vecs[i][k] = v[i][order[k]];
  }
}

// --- damped Gauss-Newton with central-difference Jacobian ---

struct gn_out {
  std::vector<double> p;
  double cost = 0.0;
  int iters = 0;
  bool converged = false; // false only when the iteration budget ran out
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i] * b[i];
  return acc;
}

// Gaussian elimination with partial pivoting; false on a vanishing pivot
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col]))
        piv = r;
    if (std::abs(a[piv][col]) < 1e-300)
      return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int cc = col; cc < n; ++cc)
        a[r][cc] -= f * a[col][cc];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int cc = r + 1; cc < n; ++cc)
      acc -= a[r][cc] * x[cc];
    x[r] = acc / a[r][r];
  }
  return true;
}

gn_out damped_gauss_newton(
    const std::function<std::vector<double>(const std::vector<double>&)>& resid,
    std::vector<double> p, const std::vector<double>& scales, int max_iter = 200,
    double tol = 1e-10) {
  const int n = static_cast<int>(p.size());
  double lam = 1e-3;
  std::vector<double> r = resid(p);
  double cost = dot(r, r);
  const int m = static_cast<int>(r.size());

  std::vector<std::vector<double>> jc(n); // Jacobian columns
  for (int it = 0; it < max_iter; ++it) {
    for (int k = 0; k < n; ++k) {
      const double h = 1e-6 * scales[k];
      std::vector<double> pp = p, pm = p;
      pp[k] += h;
      pm[k] -= h;
      const std::vector<double> rp = resid(pp);
      const std::vector<double> rm = resid(pm);
      jc[k].resize(m);
      for (int i = 0; i < m; ++i)
        jc[k][i] = (rp[i] - rm[i]) / (2.0 * h);
    }
    std::vector<double> g(n);
    std::vector<std::vector<double>> hm(n, std::vector<double>(n));
    for (int k = 0; k < n; ++k) {
      g[k] = dot(jc[k], r);
      for (int l = k; l < n; ++l)
        hm[k][l] = hm[l][k] = dot(jc[k], jc[l]);
    }

    bool advanced = false;
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::vector<std::vector<double>> a = hm;
      for (int k = 0; k < n; ++k)
        a[k][k] += lam * (hm[k][k] + 1e-300);
      std::vector<double> rhs(n);
      for (int k = 0; k < n; ++k)
        rhs[k] = -g[k];
      std::vector<double> step;
      if (!solve_dense(a, rhs, step)) {
        lam *= 10.0;
        continue;
      }
      std::vector<double> pn = p;
      for (int k = 0; k < n; ++k)
        pn[k] += step[k];
      const std::vector<double> rn = resid(pn);
      const double cn = dot(rn, rn);
      if (cn <= cost) {
        double rel = 0.0;
        for (int k = 0; k < n; ++k)
          rel = std::max(rel, std::abs(step[k]) / scales[k]);
        p = pn;
        r = rn;
        cost = cn;
        lam = std::max(lam * 0.3, 1e-12);
        if (rel < tol)
          return {p, cost, it, true};
        advanced = true;
        break;
      }
      lam *= 10.0;
    }
    if (!advanced) // no improving step exists at any damping: stationary
      return {p, cost, it, true};
  }
  return {p, cost, max_iter, false};
}

double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

} // namespace

double wrap_pi(double x) {
  double m = std::fmod(x + pi, 2.0 * pi);
  if (m < 0.0)
    m += 2.0 * pi;
  return m - pi;
}

geometry_class_t geometry_class_from_name(std::string_view name) {
  if (name == "reflection-necklace")
    return geometry_class_t::reflection_necklace;
  if (name == "transmission-hanger")
    return geometry_class_t::transmission_hanger;
  throw std::invalid_argument("invalid-geometry-class: unknown name '" +
                              std::string(name) + "'");
}

const char* geometry_class_name(geometry_class_t gc) {
  switch (gc) {
  case geometry_class_t::reflection_necklace:
    return "reflection-necklace";
  case geometry_class_t::transmission_hanger:
    return "transmission-hanger";
  }
  throw std::invalid_argument("invalid-geometry-class: unknown value");
}

std::vector<double> unwrap_phase(const trace& t) {
  check_trace_arg(t);
  return unwrap_angles(angles(t.values));
}

linear_phase_fit fit_linear_phase(const trace& t) {
  check_trace_arg(t, 2);
  const std::vector<double> w = omega_of(t);
  const std::vector<double> ph = unwrap_angles(angles(t.values));
  const double wbar = mean_of(w);
  const double phm = mean_of(ph);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w[i] - wbar;
    sxx += x * x;
    sxy += x * (ph[i] - phm);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("invalid-trace: zero frequency spread");
  const double slope = sxy / sxx;
  const double intercept = phm - slope * wbar;
  return {-slope, -intercept};
}

lorentzian_fit fit_lorentzian(const trace& t) {
  check_trace_arg(t, 8);
  const std::vector<double> w = omega_of(t);
  std::vector<double> mag(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    mag[i] = std::abs(t.values[i]);

  const double wbar = 0.5 * (w.front() + w.back());
  const double wspan = 0.5 * (w.back() - w.front());
  const double a1 = median_of(mag);

  std::size_t i_ext = 0;
  double best = -1.0;
  std::vector<double> dev(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    dev[i] = std::abs(mag[i] - a1);
    if (dev[i] > best) {
      best = dev[i];
      i_ext = i;
    }
  }
  const double wr0 = w[i_ext];
  const double depth = mag[i_ext] - a1;
  const double mad = 1.4826 * median_of(dev);
  if (std::abs(depth) < 5.0 * mad)
    throw std::runtime_error("no-resonance-found: extremum indistinguishable from background");

  std::size_t lo = i_ext;
  while (lo > 0 && std::abs(mag[lo] - a1) > std::abs(depth) / 2.0)
    --lo;
  std::size_t hi = i_ext;
  while (hi < w.size() - 1 && std::abs(mag[hi] - a1) > std::abs(depth) / 2.0)
    ++hi;
  const double fwhm0 = std::max(w[hi] - w[lo], (w[1] - w[0]) * 2.0);

  auto resid = [&](const std::vector<double>& p) {
    std::vector<double> r(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x = (w[i] - wbar) / wspan;
      const double arg = (w[i] - p[0]) / p[1];
      const double shape = (p[4] + p[5] * x) / std::sqrt(1.0 + 4.0 * arg * arg);
      r[i] = p[2] + p[3] * x + shape - mag[i];
    }
    return r;
  };
  const std::vector<double> p0 = {wr0, fwhm0, a1, 0.0, depth, 0.0};
  const std::vector<double> scales = {wspan, fwhm0, 1.0, 1.0,
                                      std::max(std::abs(depth), 1e-6), 1.0};
  const gn_out fit = damped_gauss_newton(resid, p0, scales);

  lorentzian_fit out;
  out.omega_r0 = fit.p[0];
  out.fwhm = std::abs(fit.p[1]);
  out.a1 = fit.p[2];
  out.a2 = fit.p[3];
  out.a3 = fit.p[4];
  out.a4 = fit.p[5];
  out.cost = fit.cost;
  out.iters = fit.iters;
  return out;
}

trace select_window(const trace& t, double omega_r0, double fwhm, double k) {
  check_trace_arg(t);
  if (!(k >= 3.0 && k <= 5.0))
    throw std::invalid_argument("invalid-window-multiple: k must lie in [3, 5]");
  if (!(fwhm > 0.0))
    throw std::invalid_argument("invalid-window: fwhm must be positive");
  trace out;
  out.port_pair = t.port_pair;
  out.covers_resonance = t.covers_resonance;
  for (std::size_t i = 0; i < t.freq_hz.size(); ++i) {
    const double w = 2.0 * pi * t.freq_hz[i];
    if (std::abs(w - omega_r0) <= k * fwhm) {
      out.freq_hz.push_back(t.freq_hz[i]);
      out.values.push_back(t.values[i]);
    }
  }
  if (out.freq_hz.size() < 32)
    throw std::runtime_error("window-too-sparse: fewer than 32 points in the fit window");
  return out;
}

circle_fit fit_circle(const std::vector<cplx>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("invalid-circle-input: need at least 3 points");
  const double n = static_cast<double>(points.size());
  double xm = 0.0, ym = 0.0;
  for (const cplx& s : points) {
    xm += s.real();
    ym += s.imag();
  }
  xm /= n;
  ym /= n;

  double zbar = 0.0;
  std::vector<double> u(points.size()), v(points.size()), z(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    u[i] = points[i].real() - xm;
    v[i] = points[i].imag() - ym;
    z[i] = u[i] * u[i] + v[i] * v[i];
    zbar += z[i];
  }
  zbar /= n;

  double mzz = 0.0, mzu = 0.0, mzv = 0.0, muu = 0.0, muv = 0.0, mvv = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double zc = z[i] - zbar;
    mzz += zc * zc;
    mzu += zc * u[i];
    mzv += zc * v[i];
    muu += u[i] * u[i];
    muv += u[i] * v[i];
    mvv += v[i] * v[i];
  }
  mzz /= n;
  mzu /= n;
  mzv /= n;
  muu /= n;
  muv /= n;
  mvv /= n;

  const double sc = zbar > 0.0 ? 2.0 * std::sqrt(zbar) : 1.0;
  double m[3][3] = {{mzz / (sc * sc), mzu / sc, mzv / sc},
                    {mzu / sc, muu, muv},
                    {mzv / sc, muv, mvv}};
  double vals[3];
  double vecs[3][3];
  jacobi3(m, vals, vecs);

  const double a = vecs[0][0] / sc;
  const double b = vecs[1][0];
  const double c = vecs[2][0];
  if (std::abs(a) * sc < 1e-12 * std::hypot(b, c))
    throw std::runtime_error("degenerate-geometry: points are collinear");

  const double cu = -b / (2.0 * a);
  const double cv = -c / (2.0 * a);
  const double radius = std::sqrt(cu * cu + cv * cv + zbar);
  const cplx center{cu + xm, cv + ym};
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::runtime_error("degenerate-geometry: vanishing fitted radius");

  double rms = 0.0;
  for (const cplx& s : points) {
    const double dr = std::abs(s - center) - radius;
    rms += dr * dr;
  }
  rms = std::sqrt(rms / n);
  return {center, radius, rms};
}

delay_fit refine_delay(const trace& t, double tau0) {
  check_trace_arg(t, 3);
  const std::vector<double> w = omega_of(t);

  std::vector<cplx> rotated(w.size());
  const auto rotate = [&](double tau) {
    for (std::size_t i = 0; i < w.size(); ++i)
      rotated[i] = t.values[i] * std::exp(cplx{0.0, w[i] * tau});
  };
  const auto cost = [&](double tau) {
    rotate(tau);
    try {
      const circle_fit cf = fit_circle(rotated);
      return cf.rms_residual * cf.rms_residual * static_cast<double>(w.size());
    } catch (const std::runtime_error&) {
      return 1e30;
    }
  };

  const double tol = 1e-14;
  double half_width = 5e-9;
  double tau = tau0;
  for (int round = 0;; ++round) {
    const double a = tau0 - half_width;
    const double b = tau0 + half_width;
    tau = golden_min(cost, a, b, tol);
    const bool at_edge = (tau - a) < 10.0 * tol || (b - tau) < 10.0 * tol;
    if (!at_edge)
      break;
    if (round >= 1)
      throw std::runtime_error("delay-search-failed: optimum stuck at the widened search boundary");
    half_width *= 2.0;
  }

  delay_fit out;
  out.tau = tau;
  rotate(tau);
  out.corrected = t;
  out.corrected.values = rotated;
  out.circle = fit_circle(rotated);
  return out;
}

phase_fit fit_phase_vs_frequency(const trace& t, const phase_fit_init& init) {
  check_trace_arg(t, 3);
  if (!(init.omega_r0 > 0.0) || !(init.q_l0 > 0.0))
    throw std::invalid_argument("invalid-phase-init: omega_r0 and q_l0 must be positive");
  const std::vector<double> w = omega_of(t);

  std::vector<double> raw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx ref = init.reference == phase_reference_t::centered
                         ? t.values[i] - init.center
                         : t.values[i];
    raw[i] = std::arg(ref);
  }
  const std::vector<double> ph = unwrap_angles(std::move(raw));

  const double wspan = 0.5 * (w.back() - w.front());
  const double sl = (ph.back() - ph.front()) / (w.back() - w.front());
  const double ql_init = sl < 0.0 ? init.q_l0 : -init.q_l0;

  const auto model_at = [&](double phi2, double wr, double ql, double wi) {
    return phi2 + 2.0 * std::atan(2.0 * ql * (1.0 - wi / wr));
  };
  double phi2_0 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    phi2_0 += ph[i] - model_at(0.0, init.omega_r0, ql_init, w[i]);
  phi2_0 /= static_cast<double>(w.size());

  const auto resid = [&](const std::vector<double>& p) {
    std::vector<double> r(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      r[i] = model_at(p[0], p[1], p[2], w[i]) - ph[i];
    return r;
  };
  const std::vector<double> p0 = {phi2_0, init.omega_r0, ql_init};
  const std::vector<double> scales = {1.0, wspan, std::abs(ql_init)};
  const gn_out fit = damped_gauss_newton(resid, p0, scales);
  if (!fit.converged)
    throw std::runtime_error("phase-fit-failed: no convergence within the iteration budget");

  phase_fit out;
  out.varphi2 = fit.p[0];
  out.omega_r = fit.p[1];
  out.q_l_signed = fit.p[2];
  out.q_l = std::abs(fit.p[2]);
  out.cost = fit.cost;
  out.iters = fit.iters;
  out.converged = fit.converged;
  return out;
}

std::pair<trace, cplx> normalize_off_resonant(const trace& t, const circle_fit& circle,
                                              double varphi2) {
  check_trace_arg(t);
  const cplx s_r = circle.center + circle.radius * std::exp(cplx{0.0, varphi2});
  const cplx s_off = 2.0 * circle.center - s_r;
  if (std::abs(s_off) < 1e-6)
    throw std::runtime_error("normalization-degenerate: off-resonant point too close to zero");
  trace out = t;
  for (cplx& s : out.values)
    s /= s_off;
  return {std::move(out), s_off};
}

asymmetry_correction correct_asymmetry(const trace& t, const circle_fit& circle_after_norm) {
  check_trace_arg(t);
  const double phi = wrap_pi(std::arg(circle_after_norm.center - 1.0) - pi);
  asymmetry_correction out;
  out.phi = phi;
  out.warning = std::abs(phi) > pi / 4.0;
  out.corrected = t;
  const cplx rot = std::exp(cplx{0.0, -phi});
  for (cplx& s : out.corrected.values)
    s = std::cos(phi) * (s - 1.0) * rot + 1.0;
  return out;
}

std::pair<double, double> extract_q(const circle_fit& circle_final, double q_l,
                                    geometry_class_t geometry_class) {
  (void)geometry_class; // diameter relation is the same for both classes
  if (!(q_l > 0.0))
    throw std::invalid_argument("invalid-quality-factor: q_l must be positive");
  const double r = circle_final.radius;
  if (2.0 * r >= 1.0)
    throw std::runtime_error("unphysical-fit: circle diameter implies non-positive internal loss");
  const double q_c = q_l / (2.0 * r);
  const double q_i = 1.0 / (1.0 / q_l - 1.0 / q_c);
  return {q_i, q_c};
}

fit_report run_pipeline(const trace& t, const pipeline_options& options,
                        const derived_params* truth) {
  check_trace_arg(t, 8);
  if (!(options.window_k >= 3.0 && options.window_k <= 5.0))
    throw std::invalid_argument("invalid-window-multiple: k must lie in [3, 5]");

  fit_report rep;
  const auto log_stage = [&](std::string name,
                             std::vector<std::pair<std::string, double>> params,
                             double residual, const trace* snapshot) {
    stage_log sl;
    sl.name = std::move(name);
    sl.params = std::move(params);
    sl.residual = residual;
    if (snapshot && options.keep_stage_snapshots)
      sl.snapshot = *snapshot;
    rep.stages.push_back(std::move(sl));
  };

  const auto at_stage = [](const char* name, auto&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " (stage " + name + ")");
    }
  };

  const linear_phase_fit lp = fit_linear_phase(t);
  log_stage("linear-phase", {{"tau0_s", lp.tau0}, {"varphi1_rad", lp.varphi1}}, 0.0,
            nullptr);

  const lorentzian_fit lz =
      at_stage("lorentzian", [&] { return fit_lorentzian(t); });
  log_stage("lorentzian",
            {{"omega_r0", lz.omega_r0},
             {"fwhm", lz.fwhm},
             {"a1", lz.a1},
             {"a2", lz.a2},
             {"a3", lz.a3},
             {"a4", lz.a4},
             {"iters", static_cast<double>(lz.iters)}},
            lz.cost, nullptr);

  const trace win = at_stage("window", [&] {
    return select_window(t, lz.omega_r0, lz.fwhm, options.window_k);
  });
  rep.n_window = static_cast<int>(win.freq_hz.size());
  log_stage("window",
            {{"k", options.window_k}, {"n_points", static_cast<double>(rep.n_window)}},
            0.0, &win);

  const delay_fit dl = at_stage("delay", [&] { return refine_delay(win, lp.tau0); });
  log_stage("delay",
            {{"tau_s", dl.tau},
             {"center_re", dl.circle.center.real()},
             {"center_im", dl.circle.center.imag()},
             {"radius", dl.circle.radius}},
            dl.circle.rms_residual, &dl.corrected);

  phase_fit_init pinit;
  pinit.center = dl.circle.center;
  pinit.omega_r0 = lz.omega_r0;
  pinit.q_l0 = lz.omega_r0 / lz.fwhm;
  pinit.reference = options.phase_reference;
  const phase_fit pf =
      at_stage("phase", [&] { return fit_phase_vs_frequency(dl.corrected, pinit); });
  log_stage("phase",
            {{"varphi2_rad", pf.varphi2},
             {"omega_r", pf.omega_r},
             {"q_l", pf.q_l},
             {"iters", static_cast<double>(pf.iters)}},
            pf.cost, nullptr);

  auto normalized = at_stage("normalize", [&] {
    return normalize_off_resonant(dl.corrected, dl.circle, pf.varphi2);
  });
  const trace& s2 = normalized.first;
  const cplx s_off = normalized.second;
  const circle_fit c2 = at_stage("normalize", [&] { return fit_circle(s2.values); });
  log_stage("normalize",
            {{"s_off_re", s_off.real()},
             {"s_off_im", s_off.imag()},
             {"s_off_abs", std::abs(s_off)},
             {"center_re", c2.center.real()},
             {"center_im", c2.center.imag()},
             {"radius", c2.radius}},
            c2.rms_residual, &s2);

  const asymmetry_correction ac =
      at_stage("asymmetry", [&] { return correct_asymmetry(s2, c2); });
  const circle_fit c3 =
      at_stage("asymmetry", [&] { return fit_circle(ac.corrected.values); });
  log_stage("asymmetry",
            {{"phi_rad", ac.phi},
             {"center_re", c3.center.real()},
             {"center_im", c3.center.imag()},
             {"radius", c3.radius}},
            c3.rms_residual, &ac.corrected);

  const auto [q_i, q_c] = at_stage(
      "extract", [&] { return extract_q(c3, pf.q_l, options.geometry_class); });
  log_stage("extract", {{"q_i", q_i}, {"q_c", q_c}}, 0.0, nullptr);

  rep.omega_r = pf.omega_r;
  rep.q_l = pf.q_l;
  rep.q_i = q_i;
  rep.q_c = q_c;
  rep.tau = dl.tau;
  rep.phi = ac.phi;
  rep.varphi1 = lp.varphi1;
  rep.varphi2 = wrap_pi(pf.varphi2);
  rep.s_off = s_off;
  rep.circle = c3;
  rep.asym_warning = ac.warning;

  if (truth) {
    truth_errors te;
    te.omega_r = std::abs(rep.omega_r - truth->omega_r) / truth->omega_r;
    te.q_l = std::abs(rep.q_l - truth->q_l) / truth->q_l;
    te.q_i = std::abs(rep.q_i - truth->q_i) / truth->q_i;
    te.q_c = std::abs(rep.q_c - truth->q_c) / truth->q_c;
    rep.truth_rel = te;
  }
  return rep;
}

} // namespace resonet
