#include "resonet/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace resonet {

namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(trimmed(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trimmed(cur));
  return out;
}

double parse_field(const std::string& field, std::size_t row, const std::string& col) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::runtime_error("malformed-row: row " + std::to_string(row) + " column '" +
                             col + "' is not a number");
  if (!std::isfinite(v))
    throw std::runtime_error("malformed-row: row " + std::to_string(row) + " column '" +
                             col + "' is not finite");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool known_port(const std::string& p) {
  return p == "s11" || p == "s21" || p == "s12" || p == "s22";
}

// index order that sorts rows by frequency; exact repeats are rejected
std::vector<std::size_t> frequency_order(const std::vector<double>& freq) {
  std::vector<std::size_t> order(freq.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freq[a] < freq[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (freq[order[i]] == freq[order[i - 1]])
      throw std::runtime_error("duplicate-frequency: " + fmt17(freq[order[i]]) +
                               " Hz appears more than once");
  return order;
}

std::string read_whole_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const json& need_key(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw std::runtime_error(std::string("invalid-config: missing key '") + key + "'");
  return obj.at(key);
}

double num_at(const json& obj, const char* key) {
  const json& v = need_key(obj, key);
  if (!v.is_number())
    throw std::runtime_error(std::string("invalid-config: key '") + key +
                             "' must be a number");
  return v.get<double>();
}

double num_or(const json& obj, const char* key, double dflt) {
  if (!obj.is_object() || !obj.contains(key))
    return dflt;
  return num_at(obj, key);
}

} // namespace

std::vector<trace> read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot read '" + path + "'");

  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("malformed-header: file is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();

  const std::vector<std::string> cols = split_on(line, ',');
  if (cols.empty() || cols[0] != "freq_hz")
    throw std::runtime_error("malformed-header: first column must be freq_hz");
  if (cols.size() < 3 || (cols.size() - 1) % 2 != 0)
    throw std::runtime_error("malformed-header: need re_sXY,im_sXY column pairs");

  std::vector<std::string> ports;
  for (std::size_t c = 1; c < cols.size(); c += 2) {
    if (cols[c].rfind("re_", 0) != 0 || cols[c + 1].rfind("im_", 0) != 0)
      throw std::runtime_error("malformed-header: expected re_/im_ pair, got '" +
                               cols[c] + "','" + cols[c + 1] + "'");
    const std::string p = cols[c].substr(3);
    if (p != cols[c + 1].substr(3))
      throw std::runtime_error("malformed-header: mismatched pair '" + cols[c] + "','" +
                               cols[c + 1] + "'");
    if (!known_port(p))
      throw std::runtime_error("malformed-header: unknown coefficient '" + p + "'");
    if (std::find(ports.begin(), ports.end(), p) != ports.end())
      throw std::runtime_error("malformed-header: coefficient '" + p + "' repeated");
    ports.push_back(p);
  }

  std::vector<double> freq;
  std::vector<std::vector<cplx>> vals(ports.size());
  std::size_t row = 0;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trimmed(line).empty())
      continue;
    ++row;
    const std::vector<std::string> fields = split_on(line, ',');
    if (fields.size() != cols.size())
      throw std::runtime_error("malformed-row: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(cols.size()));
    freq.push_back(parse_field(fields[0], row, cols[0]));
    for (std::size_t k = 0; k < ports.size(); ++k) {
      const double re = parse_field(fields[1 + 2 * k], row, cols[1 + 2 * k]);
      const double im = parse_field(fields[2 + 2 * k], row, cols[2 + 2 * k]);
      vals[k].push_back({re, im});
    }
  }
  if (freq.empty())
    throw std::runtime_error("invalid-trace: file contains no data rows");

  const std::vector<std::size_t> order = frequency_order(freq);
  std::vector<trace> out(ports.size());
  for (std::size_t k = 0; k < ports.size(); ++k) {
    out[k].port_pair = ports[k];
    out[k].freq_hz.reserve(freq.size());
    out[k].values.reserve(freq.size());
    for (std::size_t idx : order) {
      out[k].freq_hz.push_back(freq[idx]);
      out[k].values.push_back(vals[k][idx]);
    }
  }
  return out;
}

trace read_trace_csv_port(const std::string& path, const std::string& port) {
  std::vector<trace> all = read_trace_csv(path);
  for (trace& t : all)
    if (t.port_pair == port)
      return std::move(t);
  throw std::runtime_error("no-such-port: file has no columns for '" + port + "'");
}

void write_trace_csv(const std::string& path, const std::vector<trace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("invalid-trace: nothing to write");
  const std::vector<double>& grid = traces.front().freq_hz;
  for (const trace& t : traces) {
    if (t.freq_hz.size() != t.values.size() || t.freq_hz.empty())
      throw std::invalid_argument("invalid-trace: malformed trace for '" + t.port_pair +
                                  "'");
    if (t.freq_hz != grid)
      throw std::invalid_argument("invalid-trace: traces must share one frequency grid");
    if (!known_port(t.port_pair))
      throw std::invalid_argument("invalid-trace: unknown coefficient '" + t.port_pair +
                                  "'");
  }

  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot write '" + path + "'");
  f << "freq_hz";
  for (const trace& t : traces)
    f << ",re_" << t.port_pair << ",im_" << t.port_pair;
  f << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f << fmt17(grid[i]);
    for (const trace& t : traces)
      f << "," << fmt17(t.values[i].real()) << "," << fmt17(t.values[i].imag());
    f << "\n";
  }
  if (!f)
    throw std::runtime_error("file-open-failed: short write to '" + path + "'");
}

touchstone_data read_touchstone(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot read '" + path + "'");

  enum class ts_format { ri, ma, db };
  double funit = 1e9; // touchstone defaults: GHz, S, MA, 50 ohm
  ts_format fmt = ts_format::ma;
  double z0 = 50.0;
  bool have_opts = false;

  std::vector<double> nums;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const std::size_t bang = line.find('!'); bang != std::string::npos)
      line.erase(bang);
    line = trimmed(line);
    if (line.empty())
      continue;
    if (line[0] == '[')
      throw std::runtime_error("unsupported-format: touchstone v2 keywords are not supported");
    if (line[0] == '#') {
      if (have_opts)
        throw std::runtime_error("malformed-header: more than one option line");
      have_opts = true;
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        std::string up;
        for (char ch : tok)
          up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        if (up == "HZ")
          funit = 1.0;
        else if (up == "KHZ")
          funit = 1e3;
        else if (up == "MHZ")
          funit = 1e6;
        else if (up == "GHZ")
          funit = 1e9;
        else if (up == "S")
          ; // scattering parameters, the only kind read here
        else if (up == "Y" || up == "Z" || up == "H" || up == "G")
          throw std::runtime_error("unsupported-format: only scattering parameters are supported");
        else if (up == "RI")
          fmt = ts_format::ri;
        else if (up == "MA")
          fmt = ts_format::ma;
        else if (up == "DB")
          fmt = ts_format::db;
        else if (up == "R") {
          if (!(ss >> tok))
            throw std::runtime_error("malformed-header: R needs a reference impedance");
          z0 = parse_field(tok, lineno, "R");
        } else {
          throw std::runtime_error("malformed-header: unknown option token '" + tok + "'");
        }
      }
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok)
      nums.push_back(parse_field(tok, lineno, "data"));
  }

  if (nums.empty() || nums.size() % 9 != 0)
    throw std::runtime_error(
        "malformed-row: two-port data must come in rows of nine values");

  const std::size_t rows = nums.size() / 9;
  std::vector<double> freq(rows);
  std::array<std::vector<cplx>, 4> vals; // file order s11, s21, s12, s22
  for (auto& v : vals)
    v.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    freq[r] = nums[9 * r] * funit;
    for (int k = 0; k < 4; ++k) {
      const double a = nums[9 * r + 1 + 2 * k];
      const double b = nums[9 * r + 2 + 2 * k];
      switch (fmt) {
      case ts_format::ri:
        vals[k][r] = {a, b};
        break;
      case ts_format::ma:
        vals[k][r] = std::polar(a, b * pi / 180.0);
        break;
      case ts_format::db:
        vals[k][r] = std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0);
        break;
      }
    }
  }

  const std::vector<std::size_t> order = frequency_order(freq);
  static const char* names[4] = {"s11", "s21", "s12", "s22"};
  touchstone_data out;
  out.z0 = z0;
  out.traces.resize(4);
  for (int k = 0; k < 4; ++k) {
    out.traces[k].port_pair = names[k];
    for (std::size_t idx : order) {
      out.traces[k].freq_hz.push_back(freq[idx]);
      out.traces[k].values.push_back(vals[k][idx]);
    }
  }
  return out;
}

scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed-json: ") + e.what());
  }
  if (!j.is_object())
    throw std::runtime_error("invalid-config: top level must be an object");
  if (j.contains("schema") && !(j.at("schema").is_number() &&
                                j.at("schema").get<double>() == 1.0))
    throw std::runtime_error("unsupported-format: unknown config schema");

  const json& jg = need_key(j, "geometry");
  if (!jg.is_string())
    throw std::runtime_error("invalid-config: key 'geometry' must be a string");
  const geometry geom = geometry_from_name(jg.get<std::string>());

  const json& jl = need_key(j, "line");
  line_params line;
  line.z0 = num_or(jl, "z0", 50.0);
  line.alpha = num_or(jl, "alpha", 0.0);
  line.v_p = num_at(jl, "v_p");
  line.length = num_at(jl, "length");

  const json& jc = need_key(j, "coupling");
  coupling_spec coupling;
  coupling.c1 = num_at(jc, "c1");
  if (jc.is_object() && jc.contains("c2"))
    coupling.c2 = num_at(jc, "c2");

  std::optional<asym_rl> asym;
  if (j.contains("asymmetry")) {
    const json& ja = j.at("asymmetry");
    asym_rl a;
    a.r1 = num_or(ja, "r1", 0.0);
    a.l1 = num_or(ja, "l1", 0.0);
    a.r2 = num_or(ja, "r2", 0.0);
    a.l2 = num_or(ja, "l2", 0.0);
    asym = a;
  }

  std::optional<feedline_spec> feeds;
  if (j.contains("feedlines")) {
    const json& jf = j.at("feedlines");
    feedline_spec fs;
    fs.l1 = num_or(jf, "l1", 0.0);
    fs.l2 = num_or(jf, "l2", 0.0);
    if (jf.is_object() && jf.contains("line")) {
      const json& jfl = jf.at("line");
      line_params fl;
      fl.z0 = num_or(jfl, "z0", line.z0);
      fl.alpha = num_or(jfl, "alpha", line.alpha);
      fl.v_p = num_or(jfl, "v_p", line.v_p);
      fl.length = 0.0; // lengths come from l1/l2
      fs.line = fl;
    }
    feeds = fs;
  }

  std::optional<sweep_spec> sweep;
  if (j.contains("sweep")) {
    const json& js = j.at("sweep");
    sweep_spec ss;
    ss.f_start = num_at(js, "f_start");
    ss.f_stop = num_at(js, "f_stop");
    ss.n_points = static_cast<int>(num_or(js, "n_points", 4001.0));
    sweep = ss;
  }

  std::optional<noise_spec> noise;
  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    noise_spec ns;
    ns.sigma = num_at(jn, "sigma");
    if (jn.is_object() && jn.contains("seed")) {
      const json& jseed = jn.at("seed");
      if (jseed.is_number_unsigned())
        ns.seed = jseed.get<std::uint64_t>();
      else if (jseed.is_number_integer())
        ns.seed = static_cast<std::uint64_t>(jseed.get<std::int64_t>());
      else if (jseed.is_number())
        ns.seed = static_cast<std::uint64_t>(jseed.get<double>());
      else
        throw std::runtime_error("invalid-config: key 'seed' must be an integer");
    }
    noise = ns;
  }

  return make_scenario(geom, line, coupling, asym, feeds, sweep, noise);
}

std::string scenario_to_json(const scenario& s) {
  json j;
  j["schema"] = 1;
  j["geometry"] = geometry_name(s.geom);
  j["line"] = {{"z0", s.line.z0},
               {"alpha", s.line.alpha},
               {"v_p", s.line.v_p},
               {"length", s.line.length}};
  j["coupling"]["c1"] = s.coupling.c1;
  if (s.coupling.c2)
    j["coupling"]["c2"] = *s.coupling.c2;
  if (s.asymmetry)
    j["asymmetry"] = {{"r1", s.asymmetry->r1},
                      {"l1", s.asymmetry->l1},
                      {"r2", s.asymmetry->r2},
                      {"l2", s.asymmetry->l2}};
  if (s.feedlines) {
    j["feedlines"] = {{"l1", s.feedlines->l1}, {"l2", s.feedlines->l2}};
    if (s.feedlines->line)
      j["feedlines"]["line"] = {{"z0", s.feedlines->line->z0},
                                {"alpha", s.feedlines->line->alpha},
                                {"v_p", s.feedlines->line->v_p}};
  }
  j["sweep"] = {{"f_start", s.sweep.f_start},
                {"f_stop", s.sweep.f_stop},
                {"n_points", s.sweep.n_points}};
  if (s.noise)
    j["noise"] = {{"sigma", s.noise->sigma}, {"seed", s.noise->seed}};
  j["derived"] = {{"f0_hz", s.truth.omega0 / (2.0 * pi)},
                  {"f_r_hz", s.truth.omega_r / (2.0 * pi)},
                  {"q_c_1", s.truth.q_c_1},
                  {"q_c_2", s.truth.q_c_2},
                  {"q_c", s.truth.q_c},
                  {"q_i", s.truth.q_i},
                  {"q_l", s.truth.q_l},
                  {"phi", s.truth.phi}};
  return j.dump(2) + "\n";
}

scenario read_scenario_json(const std::string& path) {
  return parse_scenario_json(read_whole_file(path));
}

void write_scenario_json(const std::string& path, const scenario& s) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot write '" + path + "'");
  f << scenario_to_json(s);
}

std::string report_to_json(const fit_report& rep) {
  json j;
  j["schema"] = 1;
  j["omega_r_rad_s"] = rep.omega_r;
  j["omega_r_hz"] = rep.omega_r / (2.0 * pi);
  j["q_l"] = rep.q_l;
  j["q_i"] = rep.q_i;
  j["q_c"] = rep.q_c;
  j["tau_ns"] = rep.tau * 1e9;
  j["phi_rad"] = rep.phi;
  j["varphi1_rad"] = rep.varphi1;
  j["varphi2_rad"] = rep.varphi2;
  j["s_off_re"] = rep.s_off.real();
  j["s_off_im"] = rep.s_off.imag();
  j["n_window"] = rep.n_window;
  j["asym_warning"] = rep.asym_warning;
  j["circle"] = {{"center_re", rep.circle.center.real()},
                 {"center_im", rep.circle.center.imag()},
                 {"radius", rep.circle.radius},
                 {"rms_residual", rep.circle.rms_residual}};
  j["stages"] = json::array();
  for (const stage_log& st : rep.stages) {
    json js;
    js["name"] = st.name;
    js["residual"] = st.residual;
    js["params"] = json::object();
    for (const auto& [k, v] : st.params)
      js["params"][k] = v;
    j["stages"].push_back(std::move(js));
  }
  if (rep.truth_rel) {
    j["relative_errors"] = {{"omega_r", rep.truth_rel->omega_r},
                            {"q_l", rep.truth_rel->q_l},
                            {"q_i", rep.truth_rel->q_i},
                            {"q_c", rep.truth_rel->q_c}};
  }
  return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const fit_report& rep) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("file-open-failed: cannot write '" + path + "'");
  f << report_to_json(rep);
}

} // namespace resonet
