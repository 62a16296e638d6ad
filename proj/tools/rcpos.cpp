// rcpos: curvature positivity laboratory for Hermitian holomorphic bundles.
//
// Usage: rcpos <command> [--config file] [flags]; flags override file values.
// Exit codes: 0 = ran to completion (verdicts are data, not errors),
// 2 = bad configuration, 3 = computation failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcpos/config.hpp"
#include "rcpos/report.hpp"
#include "rcpos/runner.hpp"
#include "rcpos/version.hpp"

namespace {

struct Flags {
  std::string config, example, out, csv;
  std::vector<std::string> params;
  int k = 0;
  int points = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double h0 = 0.0;
  bool skeOnly = false;
};

void addFlags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file; flags override its values");
  sub.add_option("--example", f.example, "catalog example name");
  sub.add_option("--param", f.params, "example parameter override, key=value (repeatable)");
  sub.add_option("--k", f.k, "twist degree (direct-image) / positive count (fibration-check)");
  sub.add_option("--points", f.points, "number of seeded sample points");
  sub.add_option("--seed", f.seed, "seed for sampling and random data");
  sub.add_option("--tol", f.tol, "pass/fail threshold for identity checks");
  sub.add_option("--trials", f.trials, "random-data trial count");
  sub.add_option("--h0", f.h0, "finite-difference step for direct-image curvature");
  sub.add_flag("--ske-only", f.skeOnly, "direct-image: drop the determinant factor");
  sub.add_option("--out", f.out, "report file (relative paths resolve under RCPOS_OUT_DIR)");
  sub.add_option("--csv", f.csv, "margin table file, RFC-4180");
}

std::filesystem::path resolveOut(const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_relative())
    if (const char* dir = std::getenv("RCPOS_OUT_DIR")) fp = std::filesystem::path(dir) / fp;
  return fp;
}

void writeFile(const std::filesystem::path& path, const std::string& text) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcpos::RunnerError("cannot write '" + path.string() + "'");
  out << text;
}

void applyParamFlags(const std::vector<std::string>& kvs, rcpos::RunConfig& cfg) {
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw rcpos::ConfigError("--param expects key=value, got '" + kv + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1), &used);
    } catch (const std::exception&) {
      throw rcpos::ConfigError("--param value in '" + kv + "' is not a number");
    }
    if (used != kv.size() - eq - 1)
      throw rcpos::ConfigError("--param value in '" + kv + "' is not a number");
    cfg.params[kv.substr(0, eq)] = v;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcpos: numerical laboratory for Hermitian curvature positivity"};
  app.set_version_flag("--version", rcpos::kVersion);
  app.require_subcommand(1);
  Flags f;
  const std::pair<const char*, const char*> commands[] = {
      {"classify", "four positivity notions on a catalog example at sample points"},
      {"fibration-check", "split curvature, lift minima, and the spectral clamp route"},
      {"identities", "determinant, square and wedge identities on random data"},
      {"direct-image", "Gram, curvature and hypothesis-vs-conclusion sweep"},
      {"examples", "list the catalog"}};
  for (const auto& [name, desc] : commands) addFlags(*app.add_subcommand(name, desc), f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    rcpos::RunConfig cfg;
    if (active->count("--config")) cfg = rcpos::loadConfigFile(f.config);
    cfg.command = active->get_name();
    if (active->count("--example")) cfg.example = f.example;
    if (active->count("--param")) applyParamFlags(f.params, cfg);
    if (active->count("--k")) cfg.k = f.k;
    if (active->count("--points")) {
      cfg.pointCount = f.points;
      cfg.points.clear();
    }
    if (active->count("--seed")) cfg.seed = f.seed;
    if (active->count("--tol")) cfg.tol = f.tol;
    if (active->count("--trials")) cfg.trials = f.trials;
    if (active->count("--h0")) cfg.h0 = f.h0;
    if (active->count("--ske-only")) cfg.skeOnly = true;
    if (active->count("--out")) cfg.out = f.out;
    if (active->count("--csv")) cfg.csv = f.csv;

    rcpos::Report rep = rcpos::run(cfg);
    std::cout << rcpos::reportText(rep);
    if (!cfg.out.empty()) writeFile(resolveOut(cfg.out), rcpos::reportText(rep));
    if (!cfg.csv.empty()) writeFile(resolveOut(cfg.csv), rcpos::marginTableCsv(rep.body));
    return 0;
  } catch (const rcpos::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rcpos::CatalogError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 3;
  }
}
