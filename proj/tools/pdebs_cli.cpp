// pdebs: backstepping boundary control scenarios from the command line.
//
// stdout carries JSON only; diagnostics go to stderr.
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 selfcheck failure.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdebs/actuation.hpp"
#include "pdebs/config.hpp"
#include "pdebs/errors.hpp"
#include "pdebs/experiments.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/selfcheck.hpp"
#include "pdebs/sim/io.hpp"

namespace {

using nlohmann::json;
namespace ex = pdebs::experiments;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitSelfcheck = 3;

struct RunFailure {
  int code = 0;
  std::string message;
};

// Maps library exceptions onto exit codes.
template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const pdebs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pdebs::StabilizabilityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pdebs::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pdebs::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const pdebs::FitError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_geometry(ex::Geometry kind, const std::vector<std::string>& configs, int jobs) {
  std::vector<ex::Scenario> scenarios;
  for (const auto& path : configs) {
    auto s = pdebs::config::load_scenario(path);
    if (s.geometry != kind)
      throw pdebs::ConfigError("geometry.kind: '" + std::string(ex::to_string(s.geometry)) + "' in " + path +
                               " does not match subcommand '" + ex::to_string(kind) + "'");
    scenarios.push_back(std::move(s));
  }

  std::vector<json> reports(scenarios.size());
  std::vector<RunFailure> failures(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < scenarios.size();) {
      failures[i].code = guarded([&] {
        reports[i] = ex::report_json(ex::run_scenario(scenarios[i]));
        return 0;
      });
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& f : failures) code = std::max(code, f.code);
  if (code != 0) return code;
  std::cout << (reports.size() == 1 ? reports.front() : json(reports)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backstepping boundary control of 2-D reaction-diffusion PDEs"};
  app.require_subcommand(1);

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the invariant suite");

  struct GeometryCmd {
    ex::Geometry kind;
    CLI::App* cmd = nullptr;
    std::vector<std::string> configs;
    int jobs = 1;
  };
  std::vector<GeometryCmd> geo{{ex::Geometry::strip}, {ex::Geometry::square}, {ex::Geometry::sector},
                               {ex::Geometry::piano}};
  for (auto& g : geo) {
    g.cmd = app.add_subcommand(ex::to_string(g.kind), std::string("Run ") + ex::to_string(g.kind) + " scenario(s)");
    g.cmd->add_option("--config", g.configs, "Scenario JSON file (repeatable)")->required();
    g.cmd->add_option("--jobs", g.jobs, "Scenarios to run in parallel")->check(CLI::PositiveNumber);
  }

  double eps = 1.0, lam = 0.0, c = 1.0;
  auto* kdump = app.add_subcommand("kernel-dump", "Write a kernel table as CSV (xi,value)");
  std::string kgeom = "square", kout;
  int ksamples = 65, kmode = 1;
  double kextent = 1.0, kt1 = 0.0, kt2 = M_PI / 2.0;
  kdump->add_option("--geometry", kgeom, "square | strip | sector")->check(CLI::IsMember({"square", "strip", "sector"}));
  kdump->add_option("--epsilon", eps)->required();
  kdump->add_option("--lambda", lam)->required();
  kdump->add_option("--c", c)->required();
  kdump->add_option("--samples", ksamples, "Table size (>= 16)");
  kdump->add_option("--extent", kextent, "Square side L or sector radius R");
  kdump->add_option("--mode", kmode, "Sector angular mode n");
  kdump->add_option("--theta1", kt1);
  kdump->add_option("--theta2", kt2);
  kdump->add_option("--out", kout, "CSV path (default: $PDEBS_OUTPUT_DIR or ., kernel_<geometry>.csv)");

  auto* budget = app.add_subcommand("budget", "Print the mode budget N0 and cutoff N");
  std::string bgeom = "square";
  double bt1 = 0.0, bt2 = M_PI / 2.0, bR = 1.0;
  budget->add_option("--geometry", bgeom, "square | strip | sector")->check(CLI::IsMember({"square", "strip", "sector"}));
  budget->add_option("--epsilon", eps)->required();
  budget->add_option("--lambda", lam)->required();
  budget->add_option("--c", c)->required();
  budget->add_option("--theta1", bt1);
  budget->add_option("--theta2", bt2);
  budget->add_option("--R", bR);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kExitConfig;
  }

  if (*selfcheck) {
    return guarded([] {
      const auto checks = pdebs::selfcheck::run();
      json arr = json::array();
      for (const auto& ch : checks)
        arr.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}, {"bound", ch.bound}});
      const bool ok = pdebs::selfcheck::all_pass(checks);
      std::cout << json{{"checks", arr}, {"pass", ok}}.dump(2) << '\n';
      if (!ok) std::cerr << "selfcheck: one or more invariants failed\n";
      return ok ? 0 : kExitSelfcheck;
    });
  }

  for (auto& g : geo)
    if (*g.cmd) return guarded([&] { return run_geometry(g.kind, g.configs, g.jobs); });

  if (*kdump) {
    return guarded([&] {
      const pdebs::PlantParams p(eps, lam, c);
      pdebs::kernels::KernelGeometry kg;
      if (kgeom == "square") {
        kg = pdebs::kernels::KernelGeometry::square(kextent);
      } else if (kgeom == "strip") {
        kg = pdebs::kernels::KernelGeometry::strip();
      } else {
        const pdebs::modal::AngularBasis basis(kt1, kt2, kmode);
        kg = pdebs::kernels::KernelGeometry::sector(kextent, basis.alpha(kmode), kmode);
      }
      const auto table = pdebs::kernels::build_kernel_table(p, kg, ksamples);
      std::filesystem::path out = kout;
      if (out.empty()) {
        const char* env = std::getenv("PDEBS_OUTPUT_DIR");
        out = std::filesystem::path(env && *env ? env : ".") / ("kernel_" + kgeom + ".csv");
      }
      pdebs::sim::write_kernel_table(out, table);
      std::cout << json{{"geometry", kgeom}, {"samples", table.size()}, {"file", out.string()}}.dump(2) << '\n';
      return 0;
    });
  }

  if (*budget) {
    return guarded([&] {
      const pdebs::PlantParams p(eps, lam, c);
      pdebs::actuation::DecayBudget b;
      if (bgeom == "square")
        b = pdebs::actuation::min_modes_square(p);
      else if (bgeom == "strip")
        b = pdebs::actuation::min_modes_strip(p);
      else
        b = pdebs::actuation::min_modes_sector(p, bt1, bt2, bR);
      std::cout << json{{"geometry", bgeom}, {"N0", b.N0}, {"N", b.N}}.dump(2) << '\n';
      return 0;
    });
  }
  return kExitConfig;
}
