#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <cyllevy/error.hpp>
#include <cyllevy/integrate.hpp>
#include <cyllevy/io.hpp>

#include "verify/battery.hpp"
#include "verify/checks.hpp"
#include "verify/config.hpp"
#include "verify/report.hpp"

namespace fs = std::filesystem;
using namespace cyllevy;
using namespace cyllevy::verify;

namespace {

constexpr int kOk = 0;
constexpr int kFailures = 1;
constexpr int kUsage = 2;

// Stream task of the simulate command, disjoint from the check indices.
constexpr std::uint64_t kSimulateTask = 1000;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw UsageError(source + ": invalid seed '" + text + "'");
  return v;
}

// --seed, then CYLLEVY_SEED, then the config file.
ExperimentConfig load_config(const std::string& path, const std::optional<std::string>& seed_flag) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : parse_config(read_file(path));
  if (seed_flag) {
    c.seed = parse_seed(*seed_flag, "--seed");
  } else if (const char* env = std::getenv("CYLLEVY_SEED"); env != nullptr && *env != '\0') {
    c.seed = parse_seed(env, "CYLLEVY_SEED");
  }
  if (!c.seed) throw UsageError("no seed: pass --seed, set CYLLEVY_SEED or add \"seed\" to the config");
  return c;
}

int cmd_verify(const std::string& id, const std::string& config_path, const std::optional<std::string>& seed,
               const std::string& out_flag) {
  const CheckSpec& spec = find_check(id);
  const ExperimentConfig config = load_config(config_path, seed);
  const fs::path out = out_flag.empty() ? fs::path(config.output) : fs::path(out_flag);

  const auto start = std::chrono::steady_clock::now();
  CheckResult result = run_check(spec, config, *config.seed);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  Report report{config_hash(config), *config.seed, utc_timestamp(), elapsed.count(), canonical_json(config), {}};
  report.checks.push_back(std::move(result));
  const CheckResult& r = report.checks.front();
  write_file(out / "report.json", report_to_json(report));
  write_file(out / "tables" / (r.check + ".csv"), items_csv(r));
  for (const auto& t : r.tables) write_file(out / "tables" / (r.check + "-" + t.name + ".csv"), table_csv(t));

  std::size_t flagged = 0;
  for (const auto& item : r.items) flagged += item.flagged ? 1 : 0;
  std::cout << r.check << ": " << to_string(r.status()) << " (" << r.items.size() << " items, " << r.failures()
            << " failed, " << flagged << " flagged, " << std::fixed << std::setprecision(1) << elapsed.count()
            << " s)\n";
  for (const auto& item : r.items)
    if (item.status() == Status::kFail)
      std::cout << "  FAIL " << item.label << ": " << format_double(item.value)
                << (item.bound == Item::Bound::kAtMost ? " > " : " < ") << format_double(item.tolerance) << '\n';
  return r.failures() == 0 ? kOk : kFailures;
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& seed, const std::string& out_flag) {
  const ExperimentConfig config = load_config(config_path, seed);
  const fs::path out = out_flag.empty() ? fs::path(config.output) : fs::path(out_flag);
  const Stream root(*config.seed, StreamModule::kCli, kSimulateTask);
  Stream setup = root.split(0);
  const Driver driver = config.driver ? *config.driver : gaussian_driver(setup, config.dim);
  const StepFunction psi = base_integrand(config, root.split(1));
  const std::size_t paths = config.simulate.paths;
  const Stream draws = root.split(2);

  // Replica r uses the stream of replica r of integrate_step_det, so the
  // rows of path r sum to sample r of the law.
  const EmpiricalLaw law = integrate_step_det(psi, driver, paths, draws);
  const int width = static_cast<int>(std::to_string(paths - 1).size());
  for (std::size_t r = 0; r < paths; ++r) {
    Stream s = draws.split(r);
    PathTable table{psi.partition(), Matrix(), {}, s.key()};
    const Matrix g = sample_g_path(driver, psi.partition(), s, &table.jump_counts);
    table.increments.resize(psi.dim_h(), g.cols());
    for (Eigen::Index i = 0; i < g.cols(); ++i)
      table.increments.col(i) = psi.values()[static_cast<std::size_t>(i) + 1].matrix() * g.col(i);
    std::ostringstream name;
    name << "path-" << std::setw(width) << std::setfill('0') << r << ".csv";
    std::ostringstream csv;
    write_path_csv(csv, table);
    write_file(out / "paths" / name.str(), csv.str());
  }
  std::ostringstream bin;
  write_law(bin, law);
  write_file(out / "laws" / "integral.bin", bin.str());
  write_file(out / "driver.json", driver_to_json(driver));
  write_file(out / "integrand.json", step_function_to_json(psi));
  std::cout << "simulate: " << paths << " paths, " << psi.partition().intervals() << " intervals -> " << out.string()
            << '\n';
  return kOk;
}

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() == "report.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Report>> reports;
  for (const auto& f : files) {
    try {
      reports.emplace_back(fs::relative(f, dir).generic_string(), report_from_json(read_file(f)));
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
  }
  const auto rows = merge_reports(reports);
  write_file(fs::path(dir) / "summary.json", summary_json(rows));
  write_file(fs::path(dir) / "summary.csv", summary_csv(rows));
  std::size_t failing = 0;
  for (const auto& row : rows) failing += row.status == Status::kFail ? 1 : 0;
  std::cout << "report: " << rows.size() << " rows, " << failing << " failing\n";
  return failing == 0 ? kOk : kFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic integrals driven by cylindrical Levy processes: verification and simulation"};
  app.require_subcommand(1);

  std::string id, config_path, out, dir;
  std::optional<std::string> seed;

  auto* verify = app.add_subcommand("verify", "Run one verification battery");
  verify->add_option("check", id, "Check id")->required();
  verify->add_option("--config", config_path, "JSON experiment configuration");
  verify->add_option("--seed", seed, "64-bit seed (overrides CYLLEVY_SEED and the config)");
  verify->add_option("--out", out, "Output directory (default: the config's output)");

  auto* simulate = app.add_subcommand("simulate", "Write sampled paths and integral laws");
  simulate->add_option("--config", config_path, "JSON experiment configuration")->required();
  simulate->add_option("--seed", seed, "64-bit seed (overrides CYLLEVY_SEED and the config)");
  simulate->add_option("--out", out, "Output directory (default: the config's output)");

  auto* report = app.add_subcommand("report", "Merge report.json files below a directory");
  report->add_option("dir", dir, "Directory of reports")->required();

  auto* list = app.add_subcommand("list", "List check ids and their anchors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*verify) return cmd_verify(id, config_path, seed, out);
    if (*simulate) return cmd_simulate(config_path, seed, out);
    if (*report) return cmd_report(dir);
    if (*list) {
      for (const auto& c : registry()) std::cout << c.id << '\t' << c.anchor << '\n';
      return kOk;
    }
  } catch (const NonFiniteError& e) {
    std::cerr << "error: non-finite value: " << e.what() << '\n';
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsage;
}
