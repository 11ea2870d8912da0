// Command-line driver: spectral analysis, protocol trajectories, error-slope
// tables, motional error sweeps, and the continuous-protocol figures.
//
// All angle flags and config values are in units of pi (e.g. --theta 0.72).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sp/continuous.hpp"
#include "sp/errors.hpp"
#include "sp/io.hpp"
#include "sp/motion.hpp"
#include "sp/protocol.hpp"
#include "sp/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GlobalOpts {
  std::string out_dir = "out";
  int threads = 0;  // 0: hardware_concurrency, overridden by SINGLET_PUMP_THREADS
  unsigned seed = 0;
  std::string config_text;  // for the manifest hash
};

int resolve_threads(const GlobalOpts& g) {
  int fallback = g.threads > 0 ? g.threads
                               : std::max(1u, std::thread::hardware_concurrency());
  return sp::thread_count_from_env(fallback);
}

void check_pi_range(double value, double lo, double hi, const std::string& name) {
  if (!(value > lo && value < hi))
    throw CLI::ValidationError(name, name + " = " + std::to_string(value) +
                                         " outside (" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + ") in pi units");
}

sp::Schedule make_schedule(double theta_pi, const std::string& alternating) {
  if (alternating.empty()) return sp::ConstantSchedule{theta_pi * kPi};
  const auto comma = alternating.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("alternating", "expected two comma-separated pi-unit angles");
  const double t1 = std::stod(alternating.substr(0, comma));
  const double t2 = std::stod(alternating.substr(comma + 1));
  return sp::AlternatingSchedule{t1 * kPi, t2 * kPi};
}

double wall_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- subcommand handlers -------------------------------------------------------

int cmd_spectral(const GlobalOpts& g, double phi_pi, double gamma_pi, double theta_pi,
                 const std::string& alternating, bool reduced) {
  const auto t0 = std::chrono::steady_clock::now();
  check_pi_range(gamma_pi, 0.0, 0.5, "gamma");

  sp::ProtocolParams params{phi_pi * kPi, gamma_pi * kPi, make_schedule(theta_pi, alternating)};
  const sp::CycleMaps maps =
      reduced ? sp::cycle_superop_reduced(params) : sp::cycle_superop(params);
  const sp::SpectralResult res = sp::spectral_analysis(maps.composed, sp::MapKind::Discrete);

  json j = sp::spectral_to_json(res);
  j["alternating"] = maps.alternating;
  if (!res.degenerate) {
    j["n0_cycles"] = (maps.alternating ? 2.0 : 1.0) / res.gap;
    j["gap_per_cycle"] = res.gap / (maps.alternating ? 2.0 : 1.0);
  }
  if (!reduced) {
    j["steady_singlet_fidelity"] = sp::singlet_fidelity(res.steady_state);
  }
  sp::atomic_write_file(fs::path(g.out_dir) / "spectral.json", j.dump(2) + "\n");
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "spectral: gap=" << res.gap << (res.degenerate ? " (degenerate)" : "") << "\n";
  return 0;
}

int cmd_protocol_run(const GlobalOpts& g, int cycles, const std::string& initial, double phi_pi,
                     double gamma_pi, double theta_pi, const std::string& alternating) {
  const auto t0 = std::chrono::steady_clock::now();
  check_pi_range(gamma_pi, 0.0, 0.5, "gamma");
  sp::ProtocolParams params{phi_pi * kPi, gamma_pi * kPi, make_schedule(theta_pi, alternating)};

  sp::DensityMatrix rho0;
  if (initial == "dd") rho0 = sp::down_down_state();
  else if (initial == "singlet") rho0 = sp::singlet_state();
  else if (initial == "mixed") rho0 = sp::ground_mixed_state();
  else throw CLI::ValidationError("initial", "must be dd|singlet|mixed");

  const sp::Trajectory t = sp::run_protocol(rho0, params, cycles);
  sp::atomic_write_file(fs::path(g.out_dir) / "trajectory.csv", sp::trajectory_to_csv(t));
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "protocol: final fidelity " << t.fidelities.back() << "\n";
  return 0;
}

std::vector<std::string> all_channels() {
  std::vector<std::string> out;
  const char idx[] = {'0', 'x', 'y', 'z'};
  for (char a : idx)
    for (char b : idx) out.push_back(std::string{a, b});
  out.push_back("corr_x");
  out.push_back("corr_z");
  out.push_back("spin_motion");
  return out;
}

int cmd_errors_slopes(const GlobalOpts& g, std::string channels, double theta_pi,
                      double gamma_pi, const std::string& out_name) {
  const auto t0 = std::chrono::steady_clock::now();
  check_pi_range(gamma_pi, 0.0, 0.5, "gamma");

  std::vector<std::string> list;
  if (channels == "all") {
    list = all_channels();
  } else {
    std::stringstream ss(channels);
    std::string tok;
    while (std::getline(ss, tok, ',')) list.push_back(tok);
  }

  sp::ProtocolParams params{kPi / 4, gamma_pi * kPi, sp::ConstantSchedule{theta_pi * kPi}};

  std::vector<sp::SweepPoint> points;
  for (int k = 0; k < static_cast<int>(list.size()); ++k)
    points.push_back({k, {double(k)}});

  sp::SweepOptions sopt;
  sopt.parallelism = resolve_threads(g);
  auto worker = [&](const sp::SweepPoint& pt) {
    const auto spec = sp::ErrorChannelSpec::parse(list[pt.index]);
    const sp::SlopeFit fit = sp::steady_state_error_slope(params, spec);
    std::vector<double> row;
    for (double e : fit.errors) row.push_back(e);
    row.push_back(fit.slope);
    row.push_back(fit.r_squared);
    return row;
  };
  const auto results = sp::run_sweep(points, worker, sopt);

  std::ostringstream csv;
  csv << "channel,p,steady_state_error,slope_fit\n";
  char buf[160];
  for (size_t k = 0; k < list.size(); ++k) {
    if (results[k].failed) continue;
    const auto& vals = results[k].values;
    for (size_t i = 0; i < sp::kDefaultSlopeGrid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g\n", list[k].c_str(),
                    sp::kDefaultSlopeGrid[i], vals[i], vals[sp::kDefaultSlopeGrid.size()]);
      csv << buf;
    }
  }
  sp::atomic_write_file(fs::path(g.out_dir) / out_name, csv.str());
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "errors: wrote " << out_name << " for " << list.size() << " channels\n";
  return 0;
}

int cmd_motion_sweep(const GlobalOpts& g, const std::string& kind_str, int points, int cycles,
                     int fock_dim) {
  const auto t0 = std::chrono::steady_clock::now();
  const sp::SweepKind kind = sp::sweep_kind_from_string(kind_str);
  const auto grid = sp::default_sweep_grid(kind, points);

  std::vector<sp::SweepPoint> pts;
  for (int k = 0; k < static_cast<int>(grid.size()); ++k) pts.push_back({k, {grid[k]}});

  sp::SweepOptions sopt;
  sopt.parallelism = resolve_threads(g);
  sopt.checkpoint_path = (fs::path(g.out_dir) / ("fig4_" + kind_str + ".ckpt")).string();

  auto worker = [&](const sp::SweepPoint& pt) {
    sp::RkOptions ropt;
    sp::SweepRow row = sp::error_sweep_point(kind, pt.params[0], cycles, ropt);
    (void)fock_dim;
    return std::vector<double>{row.gate1_error, row.gate2_error, row.protocol_error};
  };
  const auto results = sp::run_sweep(pts, worker, sopt);

  std::vector<sp::SweepRow> rows;
  for (size_t k = 0; k < results.size(); ++k) {
    if (results[k].failed)
      throw std::runtime_error("motion sweep point failed: " + results[k].error);
    rows.push_back({grid[k], results[k].values[0], results[k].values[1], results[k].values[2]});
  }
  sp::atomic_write_file(fs::path(g.out_dir) / ("fig4_" + kind_str + ".csv"),
                        sp::sweep_rows_to_csv(kind, rows));
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "motion: wrote fig4_" << kind_str << ".csv\n";
  return 0;
}

int cmd_continuous(const GlobalOpts& g, const std::string& what, double omega_c,
                   const std::string& gammas_pi) {
  const auto t0 = std::chrono::steady_clock::now();
  char buf[200];

  if (what == "optimize") {
    const sp::ContinuousOptimum opt = sp::optimize_continuous({}, g.seed);
    const sp::RateHz hz = sp::rate_hz(opt.gap_over_j, 580.0);  // J = 0.58 kHz
    json j;
    j["omega_c_over_j"] = opt.omega_c;
    j["kappa_over_j"] = opt.kappa;
    j["gamma_over_pi"] = opt.gamma / kPi;
    j["gap_over_j"] = opt.gap_over_j;
    j["rate_hz_at_j_580"] = {{"direct", hz.direct}, {"doubled", hz.doubled}};
    sp::atomic_write_file(fs::path(g.out_dir) / "optimum.json", j.dump(2) + "\n");
    sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
    std::cout << "continuous optimize: gap/J=" << opt.gap_over_j << "\n";
    return 0;
  }

  std::vector<double> gammas;
  {
    std::stringstream ss(gammas_pi);
    std::string tok;
    while (std::getline(ss, tok, ',')) gammas.push_back(std::stod(tok) * kPi);
  }
  for (double gm : gammas) check_pi_range(gm / kPi, 0.0, 0.5, "gamma");

  std::ostringstream csv;
  csv << "omega_c_over_J,kappa_over_J,gamma_over_pi,gap_over_J,empirical_over_J\n";

  auto emit_row = [&](double oc, double kp, double gm) {
    sp::ContinuousParams p;
    p.omega_c = oc;
    p.kappa = kp;
    p.gamma = gm;
    const double gap = sp::continuous_gap(p).gap_over_j;
    const double emp = sp::empirical_rate(1.0, oc, kp, gm);
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", oc, kp, gm / kPi, gap, emp);
    csv << buf;
  };

  if (what == "kappa-scan") {
    for (double gm : gammas)
      for (int k = 0; k < 25; ++k) {
        const double kp = 0.5 * std::pow(20.0 / 0.5, k / 24.0);
        emit_row(omega_c, kp, gm);
      }
    sp::atomic_write_file(fs::path(g.out_dir) / "kappa.csv", csv.str());
  } else if (what == "gap-surface") {
    for (double gm : gammas)
      for (int a = 0; a < 16; ++a)
        for (int c = 0; c < 16; ++c) {
          const double oc = 0.5 + (8.0 - 0.5) * a / 15;
          const double kp = 0.5 + (12.0 - 0.5) * c / 15;
          emit_row(oc, kp, gm);
        }
    sp::atomic_write_file(fs::path(g.out_dir) / "gap.csv", csv.str());
  } else {
    throw CLI::ValidationError("continuous", "expected gap-surface|optimize|kappa-scan");
  }
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "continuous: wrote " << (what == "kappa-scan" ? "kappa.csv" : "gap.csv") << "\n";
  return 0;
}

int cmd_sweep_errors(const GlobalOpts& g, const std::string& channel, double pmax, int npoints) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(pmax > 0 && pmax <= 0.01))
    throw CLI::ValidationError("pmax", "pmax must lie in (0, 0.01]");
  const auto spec = sp::ErrorChannelSpec::parse(channel);
  const sp::ProtocolParams params = sp::error_analysis_params();

  std::vector<double> grid(npoints);
  for (int k = 0; k < npoints; ++k) grid[k] = pmax * (k + 1) / npoints;

  std::vector<sp::SweepPoint> pts;
  for (int k = 0; k < npoints; ++k) pts.push_back({k, {grid[k]}});
  sp::SweepOptions sopt;
  sopt.parallelism = resolve_threads(g);
  sopt.checkpoint_path = (fs::path(g.out_dir) / ("errors_" + channel + ".ckpt")).string();

  auto worker = [&](const sp::SweepPoint& pt) {
    return std::vector<double>{sp::steady_state_error(params, spec, pt.params[0])};
  };
  const auto results = sp::run_sweep(pts, worker, sopt);

  // least-squares slope over the sweep grid
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < npoints; ++k) {
    if (results[k].failed) throw std::runtime_error("sweep point failed: " + results[k].error);
    sx += grid[k];
    sy += results[k].values[0];
    sxx += grid[k] * grid[k];
    sxy += grid[k] * results[k].values[0];
  }
  const double slope = (npoints * sxy - sx * sy) / (npoints * sxx - sx * sx);

  std::ostringstream csv;
  csv << "channel,p,steady_state_error,slope_fit\n";
  char buf[160];
  for (int k = 0; k < npoints; ++k) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g\n", channel.c_str(), grid[k],
                  results[k].values[0], slope);
    csv << buf;
  }
  sp::atomic_write_file(fs::path(g.out_dir) / "errors_sweep.csv", csv.str());
  sp::write_manifest(g.out_dir, g.config_text, wall_since(t0));
  std::cout << "sweep errors: slope " << slope << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // keep BLAS single-threaded so sweep results do not depend on its pool
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  CLI::App app{"Dissipative singlet pumping simulator"};
  app.fallthrough(true);  // global flags may follow the subcommand
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "INI/TOML config file; flags override file values");

  GlobalOpts g;
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker parallelism (0 = hardware)");
  app.add_option("--seed", g.seed, "seed for optimizer multi-starts");

  // spectral
  auto* spectral = app.add_subcommand("spectral", "cycle superoperator spectral analysis");
  double phi_pi = 0.25, gamma_pi = 0.25, theta_pi = 0.75;
  std::string alternating;
  bool reduced = false;
  spectral->add_option("--phi", phi_pi, "collective angle (pi units)")->capture_default_str();
  spectral->add_option("--gamma", gamma_pi, "branching angle (pi units)")->capture_default_str();
  spectral->add_option("--theta", theta_pi, "drive-C angle (pi units)")->capture_default_str();
  spectral->add_option("--alternating", alternating, "odd,even drive-C angles (pi units)");
  spectral->add_flag("--reduced", reduced, "use the 16x16 ground-manifold map");

  // protocol run
  auto* protocol = app.add_subcommand("protocol", "discrete protocol trajectories");
  auto* prun = protocol->add_subcommand("run", "simulate N cycles");
  int cycles = 16;
  std::string initial = "dd";
  double p_phi = 0.25, p_gamma = 0.22, p_theta = 0.72;
  std::string p_alt;
  prun->add_option("--cycles", cycles)->capture_default_str();
  prun->add_option("--initial", initial, "dd|singlet|mixed")->capture_default_str();
  prun->add_option("--phi", p_phi, "pi units")->capture_default_str();
  prun->add_option("--gamma", p_gamma, "pi units")->capture_default_str();
  prun->add_option("--theta", p_theta, "pi units")->capture_default_str();
  prun->add_option("--alternating", p_alt, "odd,even drive-C angles (pi units)");

  // errors slopes
  auto* errors = app.add_subcommand("errors", "error-channel analysis");
  auto* slopes = errors->add_subcommand("slopes", "steady-state error slopes");
  std::string channels = "all";
  double e_theta = 0.72, e_gamma = 0.22;
  slopes->add_option("--channels", channels, "all or comma list (x0, 0z, corr_x, ...)")
      ->capture_default_str();
  slopes->add_option("--theta", e_theta, "pi units")->capture_default_str();
  slopes->add_option("--gamma", e_gamma, "pi units")->capture_default_str();

  // motion sweep
  auto* motion = app.add_subcommand("motion", "full spin-motion simulation");
  auto* msweep = motion->add_subcommand("sweep", "Bell-error sweeps vs the protocol");
  std::string kind = "qubit_freq";
  int mpoints = 9, mcycles = 80, fock = 12;
  msweep->add_option("--kind", kind, "qubit_freq|motional_freq|rabi|dephasing")
      ->capture_default_str();
  msweep->add_option("--points", mpoints)->capture_default_str();
  msweep->add_option("--cycles", mcycles)->capture_default_str();
  msweep->add_option("--fock", fock)->capture_default_str();

  // continuous
  auto* continuous = app.add_subcommand("continuous", "continuous-protocol analysis");
  std::string cwhat = "optimize";
  double c_omega = 6.0;
  std::string c_gammas = "0.15,0.25";
  continuous->add_option("what", cwhat, "gap-surface|optimize|kappa-scan")
      ->capture_default_str();
  continuous->add_option("--omega-c", c_omega, "drive-C frequency in units of J")
      ->capture_default_str();
  continuous->add_option("--gammas", c_gammas, "comma list of gamma (pi units)")
      ->capture_default_str();

  // sweep (checkpointed orchestration)
  auto* sweep = app.add_subcommand("sweep", "checkpointed parameter sweeps");
  auto* serr = sweep->add_subcommand("errors", "steady-state error vs p for one channel");
  std::string s_channel = "x0";
  double s_pmax = 0.01;
  int s_points = 5;
  serr->add_option("--channel", s_channel)->capture_default_str();
  serr->add_option("--pmax", s_pmax)->capture_default_str();
  serr->add_option("--points", s_points)->capture_default_str();
  auto* smot = sweep->add_subcommand("motion", "same as `motion sweep`");
  std::string s_kind = "qubit_freq";
  smot->add_option("--kind", s_kind)->capture_default_str();

  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  g.config_text = app.config_to_str(true, false);

  try {
    if (spectral->parsed())
      return cmd_spectral(g, phi_pi, gamma_pi, theta_pi, alternating, reduced);
    if (prun->parsed())
      return cmd_protocol_run(g, cycles, initial, p_phi, p_gamma, p_theta, p_alt);
    if (slopes->parsed()) return cmd_errors_slopes(g, channels, e_theta, e_gamma, "slopes.csv");
    if (msweep->parsed()) return cmd_motion_sweep(g, kind, mpoints, mcycles, fock);
    if (continuous->parsed()) return cmd_continuous(g, cwhat, c_omega, c_gammas);
    if (serr->parsed()) return cmd_sweep_errors(g, s_channel, s_pmax, s_points);
    if (smot->parsed()) return cmd_motion_sweep(g, s_kind, 9, 80, 12);
    std::cout << app.help();
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
