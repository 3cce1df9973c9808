#include "resonet/calibration.hpp"
#include "resonet/io.hpp"
#include "resonet/resonator.hpp"
#include "resonet/scenario.hpp"
#include "resonet/validate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// --seed beats RESONET_SEED beats whatever the config carries
void apply_seed_override(resonet::scenario& s, const std::optional<std::uint64_t>& seed_flag) {
  std::optional<std::uint64_t> seed = seed_flag;
  if (!seed) {
    if (const char* env = std::getenv("RESONET_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 0);
      if (end == env || *end != '\0')
        throw std::invalid_argument("invalid-seed: RESONET_SEED must be an unsigned integer");
      seed = v;
    }
  }
  if (seed && s.noise)
    s.noise->seed = *seed;
}

resonet::scenario load_scenario(const std::string& preset, const std::string& config) {
  if (!preset.empty())
    return resonet::scenario_preset(preset);
  return resonet::read_scenario_json(config);
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (char& c : e)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

int run_simulate(const std::string& preset, const std::string& config, const std::string& out,
                 const std::optional<std::uint64_t>& seed_flag) {
  resonet::scenario s = load_scenario(preset, config);
  apply_seed_override(s, seed_flag);

  const std::vector<resonet::trace> traces = resonet::simulate_sweep(s);
  resonet::write_trace_csv(out, traces);

  std::filesystem::path echo(out);
  echo.replace_extension(".scenario.json");
  resonet::write_scenario_json(echo.string(), s);

  std::printf("wrote %zu traces x %zu points to %s\n", traces.size(),
              traces.front().freq_hz.size(), out.c_str());
  std::printf("scenario echo: %s\n", echo.string().c_str());
  std::printf("truth: f_r = %.6f GHz  q_l = %.1f  q_c = %.1f  q_i = %.1f\n",
              s.truth.omega_r / two_pi / 1e9, s.truth.q_l, s.truth.q_c, s.truth.q_i);
  return 0;
}

int run_fit(const std::string& in, const std::string& port, const std::string& geometry_class,
            double window_k, const std::string& phase_reference, const std::string& stages_dir,
            const std::string& out) {
  resonet::trace t;
  if (lower_ext(in) == ".s2p") {
    const resonet::touchstone_data ts = resonet::read_touchstone(in);
    bool found = false;
    for (const resonet::trace& cand : ts.traces)
      if (cand.port_pair == port) {
        t = cand;
        found = true;
      }
    if (!found)
      throw std::invalid_argument("no-such-port: '" + port + "' not present in " + in);
  } else {
    t = resonet::read_trace_csv_port(in, port);
  }

  resonet::pipeline_options opt;
  opt.window_k = window_k;
  opt.geometry_class = resonet::geometry_class_from_name(geometry_class);
  opt.phase_reference = phase_reference == "raw" ? resonet::phase_reference_t::raw
                                                 : resonet::phase_reference_t::centered;
  opt.keep_stage_snapshots = !stages_dir.empty();

  const resonet::fit_report rep = resonet::run_pipeline(t, opt);
  resonet::write_report_json(out, rep);

  if (!stages_dir.empty()) {
    std::filesystem::create_directories(stages_dir);
    int idx = 0;
    for (const resonet::stage_log& st : rep.stages) {
      if (st.snapshot.freq_hz.empty())
        continue;
      char name[64];
      std::snprintf(name, sizeof(name), "%02d-%s.csv", ++idx, st.name.c_str());
      const std::filesystem::path p = std::filesystem::path(stages_dir) / name;
      resonet::write_trace_csv(p.string(), {st.snapshot});
    }
    std::printf("wrote %d stage snapshots to %s\n", idx, stages_dir.c_str());
  }

  std::printf("f_r = %.9f GHz  q_l = %.2f  q_i = %.2f  q_c = %.2f\n",
              rep.omega_r / two_pi / 1e9, rep.q_l, rep.q_i, rep.q_c);
  std::printf("tau = %.4f ns  phi = %.5f rad  n_window = %d\n", rep.tau * 1e9, rep.phi,
              rep.n_window);
  if (rep.asym_warning)
    std::printf("warning: large asymmetry rotation, quality factors may be biased\n");
  std::printf("report: %s\n", out.c_str());
  return 0;
}

int run_validate() {
  const std::vector<resonet::criterion_result> results = resonet::run_acceptance_suite();
  int failures = 0;
  for (const resonet::criterion_result& c : results) {
    std::printf("[%s] criterion %d: %s (%.2f s)\n", c.pass ? "PASS" : "FAIL", c.index,
                c.title.c_str(), c.runtime_s);
    for (const resonet::check_item& item : c.items)
      if (!item.pass)
        std::printf("    FAIL %s: %s\n", item.name.c_str(), item.detail.c_str());
    if (!c.pass)
      ++failures;
  }
  std::printf("%d of %zu criteria failing\n", failures, results.size());
  return failures == 0 ? 0 : 1;
}

int run_sweep(const std::string& preset, const std::string& config, const std::string& param,
              const std::string& values_csv, const std::string& out) {
  std::vector<double> values;
  {
    std::size_t pos = 0;
    while (pos <= values_csv.size()) {
      std::size_t comma = values_csv.find(',', pos);
      if (comma == std::string::npos)
        comma = values_csv.size();
      const std::string tok = values_csv.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw CLI::ValidationError("--values", "'" + tok + "' is not a number");
      values.push_back(v);
      pos = comma + 1;
    }
  }

  const resonet::scenario base = load_scenario(preset, config);
  const auto rows = resonet::sweep_parameter(base, param, values);

  std::FILE* f = std::fopen(out.c_str(), "w");
  if (!f)
    throw std::runtime_error("file-open-failed: cannot write '" + out + "'");
  std::fprintf(f, "%s,f_r_hz,q_c_1,q_c_2,q_c,q_i,q_l,phi\n", param.c_str());
  for (const auto& [v, d] : rows)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", v, d.omega_r / two_pi,
                 d.q_c_1, d.q_c_2, d.q_c, d.q_i, d.q_l, d.phi);
  std::fclose(f);

  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"superconducting microwave resonator simulation and calibration toolkit"};
  app.require_subcommand(1);

  std::string preset, config, out, in;
  std::string port = "s11";
  std::string geometry_class = "reflection-necklace";
  std::string phase_reference = "centered";
  std::string stages_dir, param, values_csv;
  double window_k = 4.0;
  std::optional<std::uint64_t> seed_flag;

  CLI::App* sim = app.add_subcommand("simulate", "synthesize a two-port frequency sweep");
  CLI::Option* sim_preset = sim->add_option("--preset", preset, "built-in scenario name");
  CLI::Option* sim_config = sim->add_option("--config", config, "scenario config (json)")
                                ->check(CLI::ExistingFile);
  sim_preset->excludes(sim_config);
  sim->add_option("--out", out, "output trace table (csv)")->required();
  sim->add_option("--seed", seed_flag, "override the noise seed");

  CLI::App* fit = app.add_subcommand("fit", "calibrate a resonator trace");
  fit->add_option("--in", in, "input trace (.csv, or .s2p touchstone)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--port", port, "which s-parameter column to fit (default s11)");
  fit->add_option("--geometry-class", geometry_class, "reflection-necklace | transmission-hanger")
      ->check(CLI::IsMember({"reflection-necklace", "transmission-hanger"}));
  fit->add_option("--window-k", window_k, "half-width of the fit window in linewidths [3, 5]");
  fit->add_option("--phase-reference", phase_reference, "centered | raw")
      ->check(CLI::IsMember({"centered", "raw"}));
  fit->add_option("--stages-dir", stages_dir, "dump per-stage trace snapshots here");
  fit->add_option("--out", out, "fit report (json)")->required();

  app.add_subcommand("validate", "run the built-in acceptance checks");

  CLI::App* sweep = app.add_subcommand("sweep", "re-derive resonator parameters along one axis");
  CLI::Option* sweep_preset = sweep->add_option("--preset", preset, "built-in scenario name");
  CLI::Option* sweep_config = sweep->add_option("--config", config, "scenario config (json)")
                                  ->check(CLI::ExistingFile);
  sweep_preset->excludes(sweep_config);
  sweep->add_option("--param", param, "c1 | c2 | alpha | length | v_p | z0")
      ->required()
      ->check(CLI::IsMember({"c1", "c2", "alpha", "length", "v_p", "z0"}));
  sweep->add_option("--values", values_csv, "comma-separated parameter values")->required();
  sweep->add_option("--out", out, "output table (csv)")->required();

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(sim) || app.got_subcommand(sweep)) {
      if (preset.empty() && config.empty())
        throw CLI::RequiredError("--preset or --config");
    }

    if (app.got_subcommand(sim))
      return run_simulate(preset, config, out, seed_flag);
    if (app.got_subcommand(fit))
      return run_fit(in, port, geometry_class, window_k, phase_reference, stages_dir, out);
    if (app.got_subcommand("validate"))
      return run_validate();
    if (app.got_subcommand(sweep))
      return run_sweep(preset, config, param, values_csv, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
