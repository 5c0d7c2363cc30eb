// Command-line front end: propagate, hom, dip, figure, superop, plot.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ptq/commands.hpp"
#include "ptq/errors.hpp"
#include "ptq/result_table.hpp"
#include "ptq/run_config.hpp"
#include "ptq/svg_plot.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SharedOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> meta;
};

void add_shared_options(CLI::App& cmd, SharedOptions& opts) {
  cmd.add_option("--config", opts.config_path, "Flat key=value or JSON config file");
  const std::pair<const char*, const char*> flags[] = {
      {"--kappa", "kappa"},         {"--gamma", "gamma"},           {"--z-grid", "z_grid"},
      {"--delay-grid", "delay_grid"}, {"--input", "input"},         {"--truncation", "truncation"},
      {"--out-dir", "out_dir"},     {"--format", "format"},         {"--workers", "workers"},
      {"--gammas", "gammas"},       {"--sigma-t", "sigma_t"},       {"--mu", "mu"},
      {"--visibility-target", "visibility_target"},
  };
  for (const auto& [flag, key] : flags) {
    cmd.add_option_function<std::string>(
        flag, [&opts, key = std::string(key)](const std::string& v) { opts.overrides[key] = v; },
        "Override config key '" + std::string(key) + "'");
  }
  cmd.add_option("--meta", opts.meta, "Run metadata as key=value (repeatable)");
}

ptq::RunConfig resolve(const SharedOptions& opts) {
  ptq::RunConfig config;
  if (!opts.config_path.empty()) ptq::load_config_file(config, opts.config_path);
  for (const auto& [key, value] : opts.overrides) config.set(key, value);
  for (const auto& kv : opts.meta) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ptq::ConfigError("--meta expects key=value, got '" + kv + "'");
    config.set("metadata." + kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

int emit(const std::vector<ptq::ResultTable>& tables, const ptq::RunConfig& config) {
  bool passed = true;
  for (const auto& table : tables) {
    for (const auto& path : ptq::write_table(table, config.out_dir, config.formats)) {
      std::cout << "wrote " << path.string() << "\n";
    }
    for (const auto& r : table.provenance.residuals) {
      std::cout << "  " << table.name << " residual " << r.name << " = " << r.value
                << (r.passed() ? " (ok)" : " (FAILED)") << "\n";
    }
    passed = passed && table.provenance.passed();
  }
  if (!passed) {
    std::cerr << "error: residual check failed; output marked as failed\n";
    return kExitNumerical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossy two-waveguide quantum optics simulator"};
  app.require_subcommand(1);

  SharedOptions propagate_opts, hom_opts, dip_opts, figure_opts, superop_opts;
  auto* propagate = app.add_subcommand("propagate", "Propagate a Fock input state over a z grid");
  add_shared_options(*propagate, propagate_opts);
  auto* hom = app.add_subcommand("hom", "Coincidence vs delay scans with Gaussian fits");
  add_shared_options(*hom, hom_opts);
  auto* dip = app.add_subcommand("dip", "Dip positions for a sweep of loss rates");
  add_shared_options(*dip, dip_opts);
  auto* figure = app.add_subcommand("figure", "Regenerate a figure data set (fig2a fig2b fig2c fig3 fig4c)");
  std::string preset;
  figure->add_option("preset", preset, "Figure preset")->required();
  add_shared_options(*figure, figure_opts);
  auto* superop = app.add_subcommand("superop", "Dump the Liouvillian and its spectrum as JSON");
  add_shared_options(*superop, superop_opts);
  std::string superop_out;
  superop->add_option("--out", superop_out, "Output path (default: stdout)");
  auto* plot = app.add_subcommand("plot", "Render an SVG from a JSON result table");
  std::string plot_from, plot_out;
  plot->add_option("--from", plot_from, "JSON result table")->required();
  plot->add_option("--out", plot_out, "Output SVG path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (propagate->parsed()) {
      const auto config = resolve(propagate_opts);
      return emit(ptq::cmd_propagate(config), config);
    }
    if (hom->parsed()) {
      const auto config = resolve(hom_opts);
      return emit(ptq::cmd_hom(config), config);
    }
    if (dip->parsed()) {
      const auto config = resolve(dip_opts);
      return emit(ptq::cmd_dip(config), config);
    }
    if (figure->parsed()) {
      const auto config = ptq::apply_figure_preset(resolve(figure_opts), preset);
      return emit(ptq::cmd_figure(config, preset), config);
    }
    if (superop->parsed()) {
      const auto text = ptq::cmd_superop(resolve(superop_opts)).dump(2) + "\n";
      if (superop_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(superop_out, std::ios::binary) << text;
      }
      return 0;
    }
    if (plot->parsed()) {
      std::ifstream in(plot_from);
      if (!in) throw ptq::ConfigError("cannot read '" + plot_from + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ptq::ConfigError(plot_from + ": " + e.what());
      }
      const auto svg = ptq::render_svg(ptq::table_from_json(doc));
      if (plot_out.empty()) {
        std::cout << svg;
      } else {
        std::ofstream(plot_out, std::ios::binary) << svg;
      }
      return 0;
    }
  } catch (const ptq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ptq::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
