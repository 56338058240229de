#include "valleyqt/scan_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <fmt/format.h>

#include "valleyqt/errors.hpp"

namespace valleyqt::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kScanHeader = "alpha_deg,intensity";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
  if (!obj.is_object()) throw ParseError(fmt::format("{}: expected a JSON object", where));
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
}

double number_at(const json& obj, const char* key, std::string_view where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("{}: missing key '{}'", where, key));
  if (!it->is_number()) throw ParseError(fmt::format("{}: '{}' must be a number", where, key));
  return it->get<double>();
}

double optional_number(const json& obj, const char* key, double fallback, std::string_view where) {
  return obj.contains(key) ? number_at(obj, key, where) : fallback;
}

json params_json(const PhysicalParams& p) {
  json j;
  j["t1"] = p.t1;
  j["t2"] = std::isinf(p.t2) ? json(nullptr) : json(p.t2);  // null = no pure dephasing
  j["gamma"] = p.gamma;
  j["i1"] = p.i1;
  j["i2"] = p.i2;
  j["i3"] = p.i3;
  j["temperature_k"] = p.temperature_k ? json(*p.temperature_k) : json(nullptr);
  return j;
}

PhysicalParams params_from_json(const json& j) {
  constexpr std::string_view where = "params";
  check_keys(j, {"t1", "t2", "gamma", "i1", "i2", "i3", "temperature_k"}, where);
  PhysicalParams p;
  p.t1 = number_at(j, "t1", where);
  if (!j.contains("t2")) throw ParseError("params: missing key 't2'");
  p.t2 = j["t2"].is_null() ? std::numeric_limits<double>::infinity() : number_at(j, "t2", where);
  p.gamma = optional_number(j, "gamma", 0.0, where);
  p.i1 = optional_number(j, "i1", 0.0, where);
  p.i2 = optional_number(j, "i2", 0.0, where);
  p.i3 = optional_number(j, "i3", 1.0, where);
  if (j.contains("temperature_k") && !j["temperature_k"].is_null())
    p.temperature_k = number_at(j, "temperature_k", where);
  return p;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  return fmt::format("{}", x);
}

// Angles go through a degree/radian round trip; 12 significant digits keep
// 15 from printing as 14.999999999999998.
std::string format_angle_deg(double rad) {
  double deg = rad_to_deg(rad);
  if (deg == 0.0) deg = 0.0;
  return fmt::format("{:.12g}", deg);
}

std::string format_pattern_csv(std::span<const double> angles, std::span<const double> values) {
  std::string out{kScanHeader};
  out += '\n';
  for (std::size_t k = 0; k < angles.size(); ++k)
    out += fmt::format("{},{}\n", format_angle_deg(angles[k]), format_number(values[k]));
  return out;
}

std::string format_scan_csv(const PLScan& scan) {
  return format_pattern_csv(scan.angles, scan.intensities);
}

void parse_scan_csv(std::istream& in, PLScan& scan) {
  scan.angles.clear();
  scan.intensities.clear();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (!header_seen) {
      if (text != kScanHeader)
        throw ParseError(fmt::format("line {}: expected header '{}'", line_no, kScanHeader),
                         line_no);
      header_seen = true;
      continue;
    }
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(fmt::format("line {}: expected two comma-separated fields", line_no),
                       line_no);
    double alpha_deg = 0.0;
    double intensity = 0.0;
    if (!parse_double(text.substr(0, comma), alpha_deg) ||
        !parse_double(text.substr(comma + 1), intensity))
      throw ParseError(fmt::format("line {}: non-numeric value in '{}'", line_no, text), line_no);
    if (intensity < 0.0)
      throw ParseError(fmt::format("line {}: negative intensity", line_no), line_no);
    const double alpha = deg_to_rad(alpha_deg);
    if (!scan.angles.empty() && !(alpha > scan.angles.back()))
      throw ParseError(fmt::format("line {}: angles must be strictly increasing", line_no),
                       line_no);
    scan.angles.push_back(alpha);
    scan.intensities.push_back(intensity);
  }
  if (!header_seen) throw ParseError("empty scan file", 0);
}

json scan_metadata_json(const PLScan& scan) {
  json j;
  j["sigma_plus"] = scan.sigma_plus;
  j["sigma_minus"] = scan.sigma_minus;
  if (scan.params) j["params"] = params_json(*scan.params);
  if (scan.prepared)
    j["prepared"] = {{"theta_deg", rad_to_deg(scan.prepared->theta)},
                     {"phi_deg", rad_to_deg(scan.prepared->phi)}};
  if (scan.seed) j["seed"] = *scan.seed;
  j["noise"] = {{"kind", scan.noise.kind == NoiseSpec::Kind::Poisson ? "poisson" : "none"},
                {"exposure", scan.noise.exposure}};
  return j;
}

void apply_scan_metadata(const json& meta, PLScan& scan) {
  constexpr std::string_view where = "scan metadata";
  check_keys(meta, {"sigma_plus", "sigma_minus", "params", "prepared", "seed", "noise"}, where);
  scan.sigma_plus = number_at(meta, "sigma_plus", where);
  scan.sigma_minus = number_at(meta, "sigma_minus", where);
  if (meta.contains("params")) scan.params = params_from_json(meta["params"]);
  if (meta.contains("prepared")) {
    const json& p = meta["prepared"];
    check_keys(p, {"theta_deg", "phi_deg"}, "prepared");
    scan.prepared = PureStateAngles{deg_to_rad(number_at(p, "theta_deg", "prepared")),
                                    deg_to_rad(number_at(p, "phi_deg", "prepared"))};
  }
  if (meta.contains("seed")) {
    if (!meta["seed"].is_number_unsigned())
      throw ParseError("scan metadata: 'seed' must be a nonnegative integer");
    scan.seed = meta["seed"].get<std::uint64_t>();
  }
  if (meta.contains("noise")) {
    const json& n = meta["noise"];
    check_keys(n, {"kind", "exposure"}, "noise");
    const std::string kind = n.value("kind", std::string("none"));
    if (kind == "none")
      scan.noise.kind = NoiseSpec::Kind::None;
    else if (kind == "poisson")
      scan.noise.kind = NoiseSpec::Kind::Poisson;
    else
      throw ParseError(fmt::format("noise: unknown kind '{}'", kind));
    scan.noise.exposure = optional_number(n, "exposure", scan.noise.exposure, "noise");
  }
}

fs::path sidecar_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

PLScan load_scan(const fs::path& csv_path) {
  PLScan scan;
  {
    std::istringstream in(read_file(csv_path));
    try {
      parse_scan_csv(in, scan);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", csv_path.string(), e.what()), e.line());
    }
  }
  const fs::path meta_path = sidecar_path(csv_path);
  const std::string meta_text = read_file(meta_path);
  try {
    apply_scan_metadata(json::parse(meta_text), scan);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", meta_path.string(), e.what()));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", meta_path.string(), e.what()));
  }
  scan.validate();
  return scan;
}

json matrix_json(const ComplexMatrix2& m) {
  json rows = json::array();
  for (int r = 0; r < 2; ++r) {
    json row = json::array();
    for (int c = 0; c < 2; ++c) row.push_back({{"re", m(r, c).real()}, {"im", m(r, c).imag()}});
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix2 matrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("matrix must be a 2x2 array");
  ComplexMatrix2 m;
  for (int r = 0; r < 2; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 2) throw ParseError("matrix must be a 2x2 array");
    for (int c = 0; c < 2; ++c) {
      const json& entry = row[static_cast<std::size_t>(c)];
      check_keys(entry, {"re", "im"}, "matrix entry");
      m(r, c) = Complex(number_at(entry, "re", "matrix entry"),
                        optional_number(entry, "im", 0.0, "matrix entry"));
    }
  }
  return m;
}

json tomography_result_json(const TomographyResult& result) {
  json j;
  j["rho"] = matrix_json(result.rho.matrix());
  j["raw_rho"] = matrix_json(result.raw_rho);
  const auto eig = result.rho.eigenvalues();
  j["eigenvalues"] = {eig[0], eig[1]};
  j["residual_rms"] = result.residual_rms;
  j["fidelity_to_target"] =
      result.fidelity_to_target ? json(*result.fidelity_to_target) : json(nullptr);
  j["projection_applied"] = result.projection_applied;
  j["visibility_estimate"] = result.visibility_estimate;
  j["q3"] = result.q3 ? json(*result.q3) : json(nullptr);
  j["compensated_visibility"] =
      result.compensated_visibility ? json(*result.compensated_visibility) : json(nullptr);
  j["warnings"] = result.warnings;
  return j;
}

DensityMatrix density_matrix_from_json(const json& j) {
  const json& m = (j.is_object() && j.contains("rho")) ? j["rho"] : j;
  const ComplexMatrix2 raw = matrix_from_json(m);
  const auto problems = DensityMatrix::violations(raw);
  if (!problems.empty())
    throw DomainError(fmt::format("invalid density matrix: {}", fmt::join(problems, "; ")));
  return DensityMatrix(raw);
}

std::string format_sweep_csv(std::span<const UncertaintyReport> reports) {
  std::string out =
      "alpha_deg,entropy_sum,entropic_bound,deviation_product,robertson_bound,coherence_sum,"
      "coherence_bound\n";
  for (const auto& r : reports)
    out += fmt::format("{},{},{},{},{},{},{}\n", format_angle_deg(r.alpha),
                       format_number(r.entropy_sum), format_number(r.entropic_bound),
                       format_number(r.deviation_product), format_number(r.robertson_bound),
                       format_number(r.coherence_r + r.coherence_q),
                       format_number(r.coherence_bound));
  return out;
}

json precession_summary_json(const PrecessionResult& result) {
  return {{"omega", result.omega},
          {"phi_tilde_deg", rad_to_deg(result.phi_tilde)},
          {"rotation_deg", rad_to_deg(result.rotation_angle)},
          {"contrast", result.contrast_factor}};
}

void atomic_write_files(std::span<const std::pair<fs::path, std::string>> files) {
  std::vector<fs::path> temps;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };

  for (const auto& [path, content] : files) {
    fs::path tmp = path;
    tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (out) out.close();
    if (!out) {
      cleanup();
      throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::error_code ec;
    fs::rename(temps[k], files[k].first, ec);
    if (ec) {
      cleanup();
      throw IoError(fmt::format("cannot write '{}': {}", files[k].first.string(), ec.message()));
    }
  }
}

}  // namespace valleyqt::io
