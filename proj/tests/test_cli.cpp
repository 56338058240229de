#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "valleyqt/cli.hpp"
#include "valleyqt/scan_io.hpp"

namespace fs = std::filesystem;
using doctest::Approx;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "valleyqt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = valleyqt::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("valleyqt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<double>> read_csv(const fs::path& path) {
  std::istringstream in(valleyqt::io::read_file(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(std::stod(f));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json read_json(const fs::path& path) {
  return nlohmann::json::parse(valleyqt::io::read_file(path));
}

std::size_t file_count(const fs::path& dir) {
  return static_cast<std::size_t>(
      std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

}  // namespace

TEST_CASE("simulate") {
  const auto dir = fresh_dir("simulate");
  const auto scan = (dir / "scan.csv").string();

  auto r = invoke({"simulate", "--theta", "90", "--phi", "0", "--visibility", "0.2", "--grid",
                   "0:360:15", "--noise", "none", "--out", scan});
  REQUIRE(r.code == 0);
  auto rows = read_csv(scan);
  CHECK(rows.size() == 25);
  double lo = 1e9, hi = -1e9;
  for (const auto& row : rows) {
    lo = std::min(lo, row[1]);
    hi = std::max(hi, row[1]);
  }
  CHECK(hi == Approx(0.6).epsilon(1e-12));
  CHECK(lo == Approx(0.4).epsilon(1e-12));
  CHECK(fs::exists(dir / "scan.meta.json"));
  CHECK(read_json(dir / "scan.meta.json")["prepared"]["theta_deg"] == 90.0);

  r = invoke({"simulate", "--theta", "0", "--out", scan});
  REQUIRE(r.code == 0);
  for (const auto& row : read_csv(scan)) CHECK(row[1] == Approx(0.5).epsilon(1e-12));

  SUBCASE("same seed, byte-identical output") {
    const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    const std::vector<std::string> common{"simulate", "--theta", "60", "--noise", "poisson",
                                          "--exposure", "1e5", "--seed", "7", "--out"};
    auto args = common;
    args.push_back(a);
    REQUIRE(invoke(args).code == 0);
    args.back() = b;
    REQUIRE(invoke(args).code == 0);
    CHECK(valleyqt::io::read_file(a) == valleyqt::io::read_file(b));
  }
  SUBCASE("default output goes to --out-dir") {
    const auto sub = dir / "sub";
    fs::create_directories(sub);
    REQUIRE(invoke({"--out-dir", sub.string(), "simulate"}).code == 0);
    CHECK(fs::exists(sub / "scan.csv"));
    CHECK(fs::exists(sub / "scan.meta.json"));
  }
  SUBCASE("invalid configurations") {
    const auto empty = dir / "empty";
    fs::create_directories(empty);
    const auto target = (empty / "x.csv").string();
    CHECK(invoke({"simulate", "--theta", "200", "--out", target}).code == 1);
    CHECK(invoke({"simulate", "--visibility", "0.5", "--t1", "2", "--out", target}).code == 1);
    CHECK(invoke({"simulate", "--visibility", "0", "--out", target}).code == 1);
    CHECK(invoke({"simulate", "--grid", "0:360", "--out", target}).code == 1);
    CHECK(invoke({"simulate", "--grid", "0:90:15", "--out", target}).code == 0);
    fs::remove_all(empty);
    fs::create_directories(empty);
    CHECK(invoke({"simulate", "--grid", "0:30:15", "--out", target}).code == 1);
    CHECK(invoke({"simulate", "--out", (dir / "no" / "such" / "x.csv").string()}).code == 3);
    CHECK(file_count(empty) == 0);
    CHECK(invoke({"bogus"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("tomo") {
  const auto dir = fresh_dir("tomo");
  const auto ref = (dir / "ref.csv").string();
  const auto s60 = (dir / "s60.csv").string();
  const auto s90 = (dir / "s90.csv").string();
  REQUIRE(invoke({"simulate", "--theta", "90", "--visibility", "1", "--out", ref}).code == 0);
  REQUIRE(invoke({"simulate", "--theta", "60", "--visibility", "0.2", "--out", s60}).code == 0);
  REQUIRE(invoke({"simulate", "--theta", "90", "--visibility", "0.2", "--out", s90}).code == 0);

  SUBCASE("compensated theta = 60 reaches the prepared state") {
    const auto out = (dir / "t60.json").string();
    const auto r = invoke({"tomo", "--scan", s60, "--calibration", ref, "--compensate-decay",
                           "0.2", "--target", "60,0", "--out", out});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(read_json(out)["fidelity_to_target"].get<double>() >= 0.9999);

    const auto self = invoke({"tomo", "--scan", s60, "--self-calibrate", "--compensate-decay",
                              "0.2", "--target", "60,0", "--out", out});
    CHECK(self.code == 0);
    CHECK(read_json(out)["fidelity_to_target"].get<double>() >= 0.9999);
  }
  SUBCASE("uncompensated theta = 90 reports the emitting coherence") {
    for (const std::string mode : {"--calibration", "--self-calibrate"}) {
      const auto out = (dir / "t90.json").string();
      std::vector<std::string> args{"tomo", "--scan", s90, mode};
      if (mode == "--calibration") args.push_back(ref);
      args.insert(args.end(), {"--out", out});
      REQUIRE(invoke(args).code == 0);
      const auto j = read_json(out);
      CHECK(j["rho"][0][1]["re"].get<double>() == Approx(0.1).epsilon(1e-12));
      CHECK(j["projection_applied"] == false);
    }
  }
  SUBCASE("over-compensation needs the projection and exits 2") {
    const auto out = (dir / "proj.json").string();
    const auto r = invoke(
        {"tomo", "--scan", s90, "--self-calibrate", "--compensate-decay", "0.1", "--out", out});
    CHECK(r.code == 2);
    const auto j = read_json(out);
    CHECK(j["projection_applied"] == true);
    CHECK(j["rho"][0][1]["re"].get<double>() == Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("a same-visibility reference is flagged") {
    const auto r = invoke({"tomo", "--scan", s60, "--calibration", s90, "--out",
                           (dir / "w.json").string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning: calibration visibility") != std::string::npos);
  }
  SUBCASE("error paths write nothing") {
    const auto out = dir / "never.json";
    CHECK(invoke({"tomo", "--scan", s60, "--out", out.string()}).code == 1);
    CHECK(invoke({"tomo", "--scan", s60, "--calibration", ref, "--self-calibrate", "--out",
                  out.string()})
              .code == 1);

    const auto bad = dir / "bad.csv";
    fs::copy_file(s60, bad);
    fs::copy_file(dir / "s60.meta.json", dir / "bad.meta.json");
    {
      std::ofstream f(bad, std::ios::app);
      f << "370,oops\n";
    }
    auto r = invoke({"tomo", "--scan", bad.string(), "--self-calibrate", "--out", out.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("line 27") != std::string::npos);

    r = invoke({"tomo", "--scan", (dir / "missing.csv").string(), "--self-calibrate", "--out",
                out.string()});
    CHECK(r.code == 3);
    CHECK(invoke({"tomo", "--scan", s60, "--self-calibrate", "--target", "60", "--out",
                  out.string()})
              .code == 1);
    CHECK_FALSE(fs::exists(out));
  }
  fs::remove_all(dir);
}

TEST_CASE("uncertainty") {
  const auto dir = fresh_dir("uncertainty");
  const auto sweep = (dir / "sweep.csv").string();

  auto r = invoke({"uncertainty", "--theta", "90", "--grid", "0:180:2.5", "--out", sweep});
  REQUIRE(r.code == 0);
  CHECK(read_csv(sweep).size() == 73);
  CHECK(r.out.find("min_entropic_slack 0 at alpha_deg") != std::string::npos);
  const auto sat = r.out.substr(r.out.find("saturated_alpha_deg"));
  CHECK(sat.find(" 45") != std::string::npos);

  r = invoke({"uncertainty", "--theta", "0", "--out", sweep});
  REQUIRE(r.code == 0);
  for (const auto& row : read_csv(sweep)) CHECK(row[1] == Approx(2.0).epsilon(1e-12));

  SUBCASE("tomography JSON and angle input agree") {
    const auto scan = (dir / "s.csv").string();
    const auto tomo = (dir / "t.json").string();
    REQUIRE(invoke({"simulate", "--theta", "60", "--visibility", "1", "--out", scan}).code == 0);
    REQUIRE(invoke({"tomo", "--scan", scan, "--self-calibrate", "--out", tomo}).code == 0);
    const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    REQUIRE(invoke({"uncertainty", "--rho", tomo, "--out", a}).code == 0);
    REQUIRE(invoke({"uncertainty", "--theta", "60", "--out", b}).code == 0);
    const auto ra = read_csv(a), rb = read_csv(b);
    REQUIRE(ra.size() == rb.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i)
      for (std::size_t k = 0; k < ra[i].size(); ++k)
        worst = std::max(worst, std::abs(ra[i][k] - rb[i][k]));
    CHECK(worst <= 1e-6);
  }
  SUBCASE("invalid inputs") {
    const auto never = (dir / "never.csv").string();
    const auto bad = dir / "bad.json";
    {
      std::ofstream f(bad);
      f << valleyqt::io::matrix_json({0.5, 0.6, 0.6, 0.5}).dump();
    }
    r = invoke({"uncertainty", "--rho", bad.string(), "--out", never});
    CHECK(r.code == 1);
    CHECK(r.err.find("semidefinite") != std::string::npos);
    {
      std::ofstream f(bad);
      f << "{";
    }
    CHECK(invoke({"uncertainty", "--rho", bad.string(), "--out", never}).code == 3);
    CHECK(invoke({"uncertainty", "--out", never}).code == 1);
    CHECK(invoke({"uncertainty", "--theta", "30", "--rho", bad.string(), "--out", never}).code ==
          1);
    CHECK_FALSE(fs::exists(never));
  }
  fs::remove_all(dir);
}

TEST_CASE("dynamics") {
  const auto dir = fresh_dir("dynamics");
  const auto run_b = [&](const std::string& b) {
    const auto csv = (dir / ("p" + b + ".csv")).string();
    const auto r = invoke({"dynamics", "--b", b, "--g", "-3.7", "--t2-star", "0.37e-12", "--out",
                           csv});
    REQUIRE(r.code == 0);
    return read_json(dir / ("p" + b + ".summary.json"));
  };

  const auto nine = run_b("9");
  CHECK(std::abs(nine["omega"].get<double>()) == Approx(2.93e12).epsilon(0.01));
  CHECK(std::abs(nine["rotation_deg"].get<double>()) == Approx(23.66).epsilon(0.05 / 23.66));
  CHECK(nine["contrast"].get<double>() == Approx(0.678).epsilon(0.001 / 0.678));
  const auto minus = run_b("-9");
  CHECK(minus["rotation_deg"].get<double>() == -nine["rotation_deg"].get<double>());
  CHECK(run_b("0")["rotation_deg"].get<double>() == 0.0);
  CHECK(read_csv(dir / "p0.csv").size() == 73);
  CHECK(read_csv(dir / "p0.csv")[0][1] == Approx(0.6).epsilon(1e-12));

  CHECK(invoke({"dynamics", "--b", "1", "--t1", "-1", "--out", (dir / "x.csv").string()}).code ==
        1);
  CHECK(invoke({"dynamics", "--out", (dir / "x.csv").string()}).code == 1);
  CHECK_FALSE(fs::exists(dir / "x.csv"));
  fs::remove_all(dir);
}

TEST_CASE("seeded pipeline is byte-identical across runs") {
  std::vector<std::string> snapshots;
  for (int run = 0; run < 2; ++run) {
    const auto dir = fresh_dir("pipeline" + std::to_string(run));
    const auto d = dir.string();
    REQUIRE(invoke({"--out-dir", d, "simulate", "--theta", "90", "--visibility", "1", "--noise",
                    "poisson", "--seed", "3", "--out", d + "/ref.csv"})
                .code == 0);
    REQUIRE(invoke({"--out-dir", d, "simulate", "--theta", "60", "--phi", "30", "--noise",
                    "poisson", "--seed", "11", "--out", d + "/scan.csv"})
                .code == 0);
    const int tomo = invoke({"--out-dir", d, "tomo", "--scan", d + "/scan.csv", "--calibration",
                             d + "/ref.csv"})
                         .code;
    REQUIRE((tomo == 0 || tomo == 2));
    REQUIRE(invoke({"--out-dir", d, "uncertainty", "--rho", d + "/tomo.json"}).code == 0);
    std::string all;
    for (const char* name : {"ref.csv", "ref.meta.json", "scan.csv", "scan.meta.json",
                             "tomo.json", "sweep.csv"})
      all += valleyqt::io::read_file(dir / name);
    snapshots.push_back(all);
    fs::remove_all(dir);
  }
  CHECK(snapshots[0] == snapshots[1]);
}
