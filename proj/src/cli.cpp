#include "valleyqt/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "valleyqt/dynamics.hpp"
#include "valleyqt/errors.hpp"
#include "valleyqt/plmodel.hpp"
#include "valleyqt/scan_io.hpp"
#include "valleyqt/tomography.hpp"
#include "valleyqt/uncertainty.hpp"

namespace valleyqt::cli {

namespace fs = std::filesystem;

namespace {

// Grid "start:stop:step" in degrees, inclusive.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = spec.find(':', pos);
    const std::string token = spec.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("invalid grid '{}': expected start:stop:step", spec));
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 3)
    throw ConfigError(fmt::format("invalid grid '{}': expected start:stop:step", spec));
  try {
    return angle_grid_deg(parts[0], parts[1], parts[2]);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("invalid grid '{}': {}", spec, e.what()));
  }
}

PureStateAngles angles_from_degrees(double theta_deg, double phi_deg) {
  PureStateAngles a{deg_to_rad(theta_deg), deg_to_rad(wrap_angle(phi_deg, 360.0))};
  a.validate();
  return a;
}

PureStateAngles parse_target(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw ConfigError(fmt::format("invalid target '{}': expected theta,phi in degrees", text));
  try {
    return angles_from_degrees(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
  } catch (const std::logic_error&) {
    throw ConfigError(fmt::format("invalid target '{}': expected theta,phi in degrees", text));
  }
}

fs::path resolve_output(const std::string& explicit_path, const std::string& out_dir,
                        const char* default_name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(out_dir) / default_name;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  double theta_deg = 90.0;
  double phi_deg = 0.0;
  std::optional<double> visibility;
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<double> gamma;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 1.0;
  std::optional<double> temperature;
  std::string grid = "0:360:15";
  std::string noise = "none";
  double exposure = 1e6;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateOptions& o, const std::string& out_dir, std::ostream& out) {
  if (o.visibility && (o.t1 || o.t2 || o.gamma))
    throw ConfigError("--visibility cannot be combined with --t1/--t2/--gamma");

  PhysicalParams params;
  if (o.t1 || o.t2 || o.gamma) {
    params.t1 = o.t1.value_or(1.0);
    params.t2 = o.t2.value_or(std::numeric_limits<double>::infinity());
    params.gamma = o.gamma.value_or(0.0);
    params.i1 = o.i1;
    params.i2 = o.i2;
    params.i3 = o.i3;
  } else {
    params = PhysicalParams::from_visibility(o.visibility.value_or(0.2), o.i1, o.i2, o.i3);
  }
  params.temperature_k = o.temperature;
  params.validate();

  NoiseSpec noise;
  if (o.noise == "poisson")
    noise = NoiseSpec::poisson(o.exposure);
  else
    noise.exposure = o.exposure;

  const auto grid = parse_grid(o.grid);
  const PLScan scan =
      synthesize_scan(angles_from_degrees(o.theta_deg, o.phi_deg), grid, params, noise, o.seed);

  const fs::path csv = resolve_output(o.out, out_dir, "scan.csv");
  const std::vector<std::pair<fs::path, std::string>> files{
      {csv, io::format_scan_csv(scan)},
      {io::sidecar_path(csv), io::scan_metadata_json(scan).dump(2) + "\n"},
  };
  io::atomic_write_files(files);
  out << fmt::format("wrote {} ({} angles) and {}\n", csv.string(), scan.angles.size(),
                     io::sidecar_path(csv).string());
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct TomoOptions {
  std::string scan;
  std::string calibration;
  bool self_calibrate = false;
  std::optional<double> q3;
  std::optional<double> compensate;
  std::string target;
  std::string extrema = "fitted";
  std::string out;
};

int cmd_tomo(const TomoOptions& o, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  if (o.calibration.empty() && !o.self_calibrate)
    throw ConfigError("tomo needs --calibration <scan.csv> or --self-calibrate");
  if (!o.calibration.empty() && o.self_calibrate)
    throw ConfigError("--calibration and --self-calibrate are mutually exclusive");

  TomographyOptions options;
  options.q3 = o.q3;
  options.compensate_visibility = o.compensate;
  if (!o.target.empty()) options.target = parse_target(o.target);
  options.extrema = o.extrema == "sampled" ? ExtremaMethod::Sampled : ExtremaMethod::Fitted;

  const PLScan scan = io::load_scan(o.scan);
  std::optional<PLScan> calibration;
  if (!o.calibration.empty()) calibration = io::load_scan(o.calibration);

  const TomographyResult result =
      reconstruct(scan, calibration ? &*calibration : nullptr, options);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';

  const fs::path path = resolve_output(o.out, out_dir, "tomo.json");
  const std::vector<std::pair<fs::path, std::string>> files{
      {path, io::tomography_result_json(result).dump(2) + "\n"}};
  io::atomic_write_files(files);

  out << fmt::format("wrote {}; rho01 = ({}, {})", path.string(),
                     io::format_number(result.rho(0, 1).real()),
                     io::format_number(result.rho(0, 1).imag()));
  if (result.fidelity_to_target)
    out << fmt::format("; fidelity {}", io::format_number(*result.fidelity_to_target));
  if (result.projection_applied) out << "; physicality projection applied";
  out << '\n';
  return result.projection_applied ? kProjected : kSuccess;
}

// ---------------------------------------------------------------------------

struct UncertaintyOptions {
  std::optional<double> theta_deg;
  double phi_deg = 0.0;
  std::string rho;
  double r_angle_deg = 0.0;
  std::string grid = "0:180:2.5";
  std::string out;
};

int cmd_uncertainty(const UncertaintyOptions& o, const std::string& out_dir,
                    std::ostream& out) {
  if (o.theta_deg.has_value() == !o.rho.empty())
    throw ConfigError("uncertainty needs exactly one of --theta or --rho");

  const DensityMatrix rho =
      o.theta_deg ? pure_state(angles_from_degrees(*o.theta_deg, o.phi_deg))
                  : [&] {
                      try {
                        return io::density_matrix_from_json(
                            nlohmann::json::parse(io::read_file(o.rho)));
                      } catch (const nlohmann::json::exception& e) {
                        throw ParseError(fmt::format("{}: {}", o.rho, e.what()));
                      }
                    }();

  const auto grid = parse_grid(o.grid);
  const auto reports = uncertainty_sweep(rho, deg_to_rad(o.r_angle_deg), grid);

  const fs::path path = resolve_output(o.out, out_dir, "sweep.csv");
  const std::vector<std::pair<fs::path, std::string>> files{{path, io::format_sweep_csv(reports)}};
  io::atomic_write_files(files);

  double min_slack = reports.front().entropic_slack();
  for (const auto& r : reports) min_slack = std::min(min_slack, r.entropic_slack());
  std::vector<std::string> saturated;
  std::string argmin;
  for (const auto& r : reports) {
    if (argmin.empty() && r.entropic_slack() <= min_slack + 1e-12)
      argmin = io::format_angle_deg(r.alpha);
    if (r.entropic_slack() <= 1e-9) saturated.push_back(io::format_angle_deg(r.alpha));
  }
  out << fmt::format("wrote {}\n", path.string());
  // Saturated points carry eigenvector rounding of order 1e-16.
  const double shown = std::abs(min_slack) < 1e-12 ? 0.0 : min_slack;
  out << fmt::format("min_entropic_slack {} at alpha_deg {}\n", io::format_number(shown), argmin);
  out << fmt::format("saturated_alpha_deg {}\n", fmt::join(saturated, " "));
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct DynamicsOptions {
  double b_field = 0.0;
  double g_factor = -3.7;
  double t1 = 1.85e-12;
  double t2_star = 0.37e-12;
  std::string grid = "0:360:5";
  std::string out;
  std::string summary;
};

int cmd_dynamics(const DynamicsOptions& o, const std::string& out_dir, std::ostream& out) {
  const FieldParams params{o.b_field, o.g_factor, o.t1, o.t2_star};
  params.validate();
  const auto result = precession(params);

  const auto grid = parse_grid(o.grid);
  std::vector<double> pattern;
  pattern.reserve(grid.size());
  for (double alpha : grid) pattern.push_back(integrated_pl_pattern(alpha, params));

  const fs::path csv = resolve_output(o.out, out_dir, "pattern.csv");
  fs::path summary = o.summary;
  if (summary.empty()) summary = fs::path(csv).replace_extension(".summary.json");
  const std::string summary_text = io::precession_summary_json(result).dump(2) + "\n";
  const std::vector<std::pair<fs::path, std::string>> files{
      {csv, io::format_pattern_csv(grid, pattern)}, {summary, summary_text}};
  io::atomic_write_files(files);
  out << summary_text;
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Valley-qubit PL simulation, tomography and uncertainty analysis", "valleyqt"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  if (const char* env = std::getenv("VALLEYQT_OUTPUT_DIR"); env && *env) out_dir = env;
  app.add_option("--out-dir", out_dir, "Directory for default output paths");

  const auto angle_deg = CLI::Range(0.0, 180.0);
  const auto positive = CLI::PositiveNumber;
  const auto nonnegative = CLI::NonNegativeNumber;

  // simulate
  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a polarization-resolved PL scan");
  simulate->add_option("--theta", sim.theta_deg, "Polar angle, degrees")->check(angle_deg);
  simulate->add_option("--phi", sim.phi_deg, "Azimuthal angle, degrees")
      ->check(CLI::Range(0.0, 360.0));
  simulate->add_option("--visibility", sim.visibility, "(T2*/T1) e^-Gamma in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--t1", sim.t1, "Population lifetime")->check(positive);
  simulate->add_option("--t2", sim.t2, "Valley coherence time")->check(positive);
  simulate->add_option("--gamma", sim.gamma, "Off-diagonal suppression exponent")
      ->check(nonnegative);
  simulate->add_option("--i1", sim.i1, "Unpolarized thermal weight")->check(nonnegative);
  simulate->add_option("--i2", sim.i2, "Polarized thermal weight")->check(nonnegative);
  simulate->add_option("--i3", sim.i3, "PL weight")->check(nonnegative);
  simulate->add_option("--temperature", sim.temperature, "Temperature label, K");
  simulate->add_option("--grid", sim.grid, "Analyzer angles start:stop:step, degrees");
  simulate->add_option("--noise", sim.noise, "none | poisson")
      ->check(CLI::IsMember({"none", "poisson"}));
  simulate->add_option("--exposure", sim.exposure, "Counts per unit intensity")
      ->check(nonnegative);
  simulate->add_option("--seed", sim.seed, "Noise seed");
  simulate->add_option("--out", sim.out, "Output CSV (sidecar written next to it)");

  // tomo
  TomoOptions tomo;
  auto* tomo_cmd = app.add_subcommand("tomo", "Reconstruct the density matrix from a scan");
  tomo_cmd->add_option("--scan", tomo.scan, "Scan CSV")->required();
  tomo_cmd->add_option("--calibration", tomo.calibration, "theta = 90 deg reference scan CSV (sets unit contrast)");
  tomo_cmd->add_flag("--self-calibrate", tomo.self_calibrate,
                     "Infer the unit-contrast reference from the scan itself");
  tomo_cmd->add_option("--q3", tomo.q3, "PL fraction q3 (default: from scan params)")
      ->check(CLI::Range(0.0, 1.0));
  tomo_cmd->add_option("--compensate-decay", tomo.compensate,
                       "Divide coherences by this visibility")
      ->check(CLI::Range(0.0, 1.0));
  tomo_cmd->add_option("--target", tomo.target, "Target state theta,phi in degrees");
  tomo_cmd->add_option("--extrema", tomo.extrema, "fitted | sampled")
      ->check(CLI::IsMember({"fitted", "sampled"}));
  tomo_cmd->add_option("--out", tomo.out, "Output JSON");

  // uncertainty
  UncertaintyOptions unc;
  auto* unc_cmd = app.add_subcommand("uncertainty", "Sweep uncertainty relations over alpha");
  unc_cmd->add_option("--theta", unc.theta_deg, "Pure state polar angle, degrees")
      ->check(angle_deg);
  unc_cmd->add_option("--phi", unc.phi_deg, "Pure state azimuth, degrees")
      ->check(CLI::Range(0.0, 360.0));
  unc_cmd->add_option("--rho", unc.rho, "Tomography result JSON");
  unc_cmd->add_option("--r-angle", unc.r_angle_deg, "Angle of R, degrees");
  unc_cmd->add_option("--grid", unc.grid, "Detection angles start:stop:step, degrees");
  unc_cmd->add_option("--out", unc.out, "Output CSV");

  // dynamics
  DynamicsOptions dyn;
  auto* dyn_cmd = app.add_subcommand("dynamics", "Magnetic-field rotated PL pattern");
  dyn_cmd->add_option("--b", dyn.b_field, "Longitudinal field, tesla")->required();
  dyn_cmd->add_option("--g", dyn.g_factor, "Lande g factor");
  dyn_cmd->add_option("--t1", dyn.t1, "Population lifetime, s")->check(positive);
  dyn_cmd->add_option("--t2-star", dyn.t2_star, "Effective coherence time, s")->check(positive);
  dyn_cmd->add_option("--grid", dyn.grid, "Analyzer angles start:stop:step, degrees");
  dyn_cmd->add_option("--out", dyn.out, "Pattern CSV");
  dyn_cmd->add_option("--summary", dyn.summary, "Summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out_dir, out);
    if (*tomo_cmd) return cmd_tomo(tomo, out_dir, out, err);
    if (*unc_cmd) return cmd_uncertainty(unc, out_dir, out);
    if (*dyn_cmd) return cmd_dynamics(dyn, out_dir, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CalibrationError& e) {
    err << "calibration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace valleyqt::cli
