// mvps: simulation and verification driver.
//
//   mvps <subcommand> [--config PATH] [--out DIR] [--set section.key=value]...
//        [--seed N] [--deterministic]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 usage or config error.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "mvp/config.hpp"
#include "mvp/errors.hpp"
#include "mvp/pipelines.hpp"

namespace fs = std::filesystem;
using namespace mvp;

namespace {

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char two[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(two, sizeof(two), "%02x", md[i]);
    hex += two;
  }
  return hex;
}

// sha256sum-compatible listing of every regular file under dir.
void write_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.sha256") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ofstream out(dir / "manifest.sha256");
  for (const auto& f : files) out << sha256_file(f) << "  " << fs::relative(f, dir).string() << "\n";
}

using Pipeline = std::function<pipeline::Outcome(const ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::pair<std::string, Pipeline>>& subcommands() {
  using namespace pipeline;
  static const std::map<std::string, std::pair<std::string, Pipeline>> table = {
      {"simulate", {"self-consistent run: series.csv and snapshots", simulate}},
      {"verify-kinematics",
       {"exact characteristics against ODE and identity oracles",
        [](const ExperimentConfig& c, const std::string&) { return verify_kinematics(c); }}},
      {"verify-fields",
       {"Poisson convergence, weak norms, field inequality probes",
        [](const ExperimentConfig& c, const std::string&) { return verify_fields(c); }}},
      {"verify-representation",
       {"density representation mismatch under quadrature refinement",
        [](const ExperimentConfig& c, const std::string&) { return verify_representation(c); }}},
      {"verify-inequalities",
       {"moment interpolation, small/large-time split, t0 rule",
        [](const ExperimentConfig& c, const std::string&) { return verify_inequalities(c); }}},
      {"verify-gronwall", {"moment propagation run with Gronwall window fits", verify_gronwall}},
      {"verify-stability", {"paired runs and the log-Lipschitz stability functional", verify_stability}},
      {"verify-decay", {"velocity decay envelope on a tagged run (+ bounded density)", verify_decay}},
      {"scan-singularity", {"tabulate Jacobian, amplification and zeta near 2 pi / omega", scan_singularity}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mvps: magnetized Vlasov-Poisson particle simulation and estimate verification"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "mvps_out";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "config file (defaults apply when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--set", sets, "override, section.key=value (repeatable)");
    sub->add_option("--seed", seed, "shorthand for --set run.seed=N");
    sub->add_flag("--deterministic", deterministic, "fixed-order parallel reductions");
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub->parsed()) name = n;
  }
  CLI::App* sub = subs.at(name);
  if (sub->count("--seed") > 0) sets.push_back("run.seed=" + std::to_string(seed));
  if (deterministic) sets.push_back("run.deterministic=true");

  ExperimentConfig config;
  try {
    config = config_path.empty() ? parse_config_text("", sets) : parse_config(config_path, sets);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const fs::path out(out_dir);
  try {
    fs::create_directories(out);
    std::ofstream(out / "config.ini") << format_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot prepare output directory '" << out_dir << "': " << e.what() << "\n";
    return 2;
  }

  int status = 0;
  pipeline::Outcome outcome;
  try {
    outcome = subcommands().at(name).second(config, out.string());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    status = 2;
  } catch (const std::exception& e) {
    std::cerr << "FAIL " << name << ": " << e.what() << "\n";
    status = 1;
  }
  if (status == 0) {
    harness::write_reports((out / "reports.txt").string(), outcome.reports);
    harness::write_summary_csv((out / "summary.csv").string(), outcome.reports);
    for (const auto& r : outcome.reports) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  max_ratio=" << r.max_ratio
                << " threshold=" << r.threshold << "\n";
    }
    auto failed = std::find_if(outcome.reports.begin(), outcome.reports.end(), [](const auto& r) { return !r.pass; });
    if (failed != outcome.reports.end()) {
      std::cerr << "first failing check: " << failed->name << "\n";
      status = 1;
    }
  }
  write_manifest(out);
  return status;
}
