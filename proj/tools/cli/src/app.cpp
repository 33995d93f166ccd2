#include "koopkern/cli/app.hpp"

#include "koopkern/cli/config.hpp"
#include "koopkern/cli/experiment.hpp"
#include "koopkern/dynamics.hpp"
#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <ostream>

namespace koopkern::cli {

namespace {

struct RunFlags {
  std::string config;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  auto* cfg = sub->add_option("--config", f.config, "experiment config (INI)");
  auto* pre = sub->add_option("--preset", f.preset, "built-in preset name");
  cfg->excludes(pre);
  sub->add_option("--out", f.out, "output directory (overrides [output] dir)");
  f.seed_opt = sub->add_option("--seed", f.seed, "seed (overrides [experiment] seed)");
  f.threads_opt = sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

int fail(std::ostream& err, const char* kind, int code, const std::string& msg,
         const std::string& extra = "") {
  std::string m = msg;
  for (char& ch : m)
    if (ch == '\n' || ch == '\r') ch = ' ';
  err << fmt::format("koopkern: error kind={} exit={}{} msg={}\n", kind, code, extra, m);
  return code;
}

int run_one(const std::string& subcommand, const RunFlags& f, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg;
    if (!f.config.empty())
      cfg = load_config(f.config);
    else if (!f.preset.empty())
      cfg = preset(f.preset);
    else
      throw ConfigError("one of --config or --preset is required");
    if (subcommand != "run" && cfg.kind != subcommand)
      throw ConfigError(fmt::format("subcommand '{}' does not match experiment kind '{}'",
                                    subcommand, cfg.kind));
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.seed_opt->count()) cfg.seed = f.seed;
    if (f.threads_opt->count()) set_num_threads(f.threads);

    const auto report = run_experiment(cfg);
    for (const auto& path : write_report(report)) out << path << '\n';
    for (const auto& w : report.warnings) err << "koopkern: warning " << w << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(err, "config", kExitConfig, e.what());
  } catch (const IoError& e) {
    return fail(err, "io", kExitNumerical, e.what());
  } catch (const BlowUp& e) {
    return fail(err, "blowup", kExitBlowUp, e.what(), fmt::format(" escape_time={}", e.escape_time()));
  } catch (const Degenerate& e) {
    return fail(err, "degenerate", kExitNumerical, e.what());
  } catch (const IllConditioned& e) {
    return fail(err, "ill_conditioned", kExitNumerical, e.what());
  } catch (const Divergence& e) {
    return fail(err, "divergence", kExitNumerical, e.what());
  } catch (const Inconclusive& e) {
    return fail(err, "inconclusive", kExitNumerical, e.what());
  } catch (const DomainError& e) {
    return fail(err, "domain", kExitNumerical, e.what());
  } catch (const Error& e) {
    return fail(err, "numerical", kExitNumerical, e.what());
  } catch (const std::exception& e) {
    return fail(err, "internal", kExitNumerical, e.what());
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel methods for principal Koopman eigenfunctions"};
  app.name("koopkern");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> experiments{
      {"solve", "penalized kernel collocation"},
      {"mkl", "multiple kernel learning over a base-kernel dictionary"},
      {"path-integral", "truncated path-integral coordinate and its residual"},
      {"mercer", "discrete Mercer decomposition of a kernel on a grid"},
      {"unify", "Green's, resolvent and closed-form advection kernels"},
      {"run", "run whatever kind the config declares"},
  };
  std::vector<RunFlags> flags(experiments.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    auto* sub = app.add_subcommand(experiments[i].first, experiments[i].second);
    add_run_flags(sub, flags[i]);
    subs.push_back(sub);
  }

  auto* list_systems = app.add_subcommand("list-systems", "print the built-in systems");
  auto* list_presets = app.add_subcommand("list-presets", "print the preset names");
  std::string preset_name;
  auto* dump = app.add_subcommand("preset", "print a preset as INI");
  dump->add_option("name", preset_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    return fail(err, "usage", kExitConfig, e.what());
  }

  if (list_systems->parsed()) {
    for (const auto& name : builtin_system_names()) out << name << '\n';
    return kExitOk;
  }
  if (list_presets->parsed()) {
    for (const auto& name : preset_names()) out << name << '\n';
    return kExitOk;
  }
  if (dump->parsed()) {
    try {
      out << to_ini(preset(preset_name));
      return kExitOk;
    } catch (const ConfigError& e) {
      return fail(err, "config", kExitConfig, e.what());
    }
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) return run_one(experiments[i].first, flags[i], out, err);
  return fail(err, "usage", kExitConfig, "no subcommand");
}

}  // namespace koopkern::cli
