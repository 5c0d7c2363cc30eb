#include "ptq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ptq/coupler_analytic.hpp"
#include "ptq/errors.hpp"
#include "ptq/hom.hpp"
#include "ptq/lindblad.hpp"
#include "ptq/parallel.hpp"

namespace ptq {
namespace {

constexpr double kResidualThreshold = 1e-8;
constexpr double kHermitianVisibility = 0.87;
constexpr double kLossyVisibility = 0.90;
constexpr double kShiftMatchedGamma = 0.4;

Provenance make_provenance(const RunConfig& config, std::string command) {
  Provenance p;
  p.command = std::move(command);
  p.config_hash = config.hash();
  p.metadata = config.metadata;
  return p;
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

double max_abs_diff(double a, double b) { return std::abs(a - b); }

bool ascending(const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); }

// Photon-number expectations and coincidence for a state given by its index
// in the Fock basis, propagated with a precomputed evolution operator.
struct Observables {
  double pop_l;
  double pop_r;
  double trace;
  double coincidence;
};

Observables observe(const DensityMatrix& rho) {
  rho.validate();
  return {number_expectation(rho, Mode::L), number_expectation(rho, Mode::R), rho.trace(), coincidence(rho)};
}

DensityMatrix evolve(const CMatrix& evolution, const DensityMatrix& rho0) {
  return DensityMatrix(rho0.basis_ptr(),
                       unvectorize(evolution * vectorize(rho0.matrix()), rho0.dimension()));
}

// Single-photon detection probabilities P[out][in] from the engine.
struct SinglePhotonMap {
  double ll, rl, lr, rr;  // P(out | in), e.g. rl = P(out R | in L)
};

SinglePhotonMap single_photon_map(const CMatrix& evolution, const BasisPtr& basis) {
  const auto from_l = observe(evolve(evolution, DensityMatrix::pure(basis, {1, 0})));
  const auto from_r = observe(evolve(evolution, DensityMatrix::pure(basis, {0, 1})));
  return {from_l.pop_l, from_l.pop_r, from_r.pop_l, from_r.pop_r};
}

std::string dip_flag(Regime regime) {
  switch (regime) {
    case Regime::Unbroken: return "dip";
    case Regime::ExceptionalPoint: return "exceptional_point_limit";
    case Regime::Broken: return "no_dip";
  }
  return "unknown";
}

ResultTable population_figure(const RunConfig& config, std::string name, std::string title) {
  const CouplerParams params(config.kappa, config.gamma);
  const auto basis = build_basis(std::max(config.truncation, 1));
  const auto superop = build_liouvillian(basis, params);
  const auto zs = parse_grid(config.z_grid);

  ResultTable table;
  table.name = std::move(name);
  table.columns = {"z", "pop_L_input_L", "pop_R_input_L", "pop_L_input_R", "pop_R_input_R", "residual"};
  table.rows.resize(zs.size());
  parallel_for(zs.size(), config.workers, [&](std::size_t i) {
    const auto m = single_photon_map(evolution_operator(superop, zs[i]), basis);
    const auto u = transfer_matrix(params, zs[i]);
    const double residual = std::max({max_abs_diff(m.ll, std::norm(u.ll)), max_abs_diff(m.rl, std::norm(u.rl)),
                                      max_abs_diff(m.lr, std::norm(u.lr)), max_abs_diff(m.rr, std::norm(u.rr))});
    table.rows[i] = {zs[i], m.ll, m.rl, m.lr, m.rr, residual};
  });

  double worst = 0.0;
  for (double r : table.numeric_column("residual")) worst = std::max(worst, r);
  table.provenance = make_provenance(config, "figure " + table.name);
  table.provenance.residuals.push_back({"engine_vs_transfer_matrix", worst, kResidualThreshold});
  table.provenance.notes["kappa"] = fmt_num(params.kappa());
  table.provenance.notes["gamma"] = fmt_num(params.gamma());
  table.provenance.notes["regime"] = std::string(to_string(params.regime()));

  PlotSpec plot{title, "z (cm)", "intensity", "z",
                {"pop_L_input_L", "pop_R_input_L", "pop_L_input_R", "pop_R_input_R"}, {}, std::nullopt};
  const double half = params.coupling_length() / 2.0;
  plot.markers.push_back({half, "L_c/2"});
  table.provenance.notes["half_coupling_length_cm"] = fmt_num(half);
  for (Mode input : {Mode::L, Mode::R}) {
    const char* tag = input == Mode::L ? "L" : "R";
    if (const auto z_eq = equal_population_crossing(params, input)) {
      if (params.gamma() > 0.0) plot.markers.push_back({*z_eq, fmt::format("equal ({} input)", tag)});
      table.provenance.notes[fmt::format("equal_population_z_input_{}", tag)] = fmt_num(*z_eq);
    }
  }
  table.plot = std::move(plot);
  return table;
}

ResultTable coincidence_figure(const RunConfig& config) {
  const CouplerParams hermitian(config.kappa, 0.0);
  const CouplerParams lossy(config.kappa, config.gamma);
  const auto basis = build_basis(std::max(config.truncation, 2));
  const auto l_herm = build_liouvillian(basis, hermitian);
  const auto l_lossy = build_liouvillian(basis, lossy);
  const auto rho0 = DensityMatrix::pure(basis, {1, 1});
  const auto zs = parse_grid(config.z_grid);

  ResultTable table;
  table.name = "fig2c";
  table.columns = {"z", "coincidence_hermitian", "coincidence_lossy", "residual"};
  table.rows.resize(zs.size());
  parallel_for(zs.size(), config.workers, [&](std::size_t i) {
    const double herm = coincidence(propagate(rho0, l_herm, zs[i]));
    const double loss = coincidence(propagate(rho0, l_lossy, zs[i]));
    const double residual = std::max(max_abs_diff(herm, coincidence_rate(hermitian, zs[i])),
                                     max_abs_diff(loss, coincidence_rate(lossy, zs[i])));
    table.rows[i] = {zs[i], herm, loss, residual};
  });

  double worst = 0.0;
  for (double r : table.numeric_column("residual")) worst = std::max(worst, r);
  auto& p = table.provenance = make_provenance(config, "figure fig2c");
  p.residuals.push_back({"engine_vs_closed_form", worst, kResidualThreshold});
  p.notes["kappa"] = fmt_num(config.kappa);
  p.notes["gamma"] = fmt_num(config.gamma);

  const auto dip = dip_positions(lossy);
  const double ep_limit = 1.0 / (std::numbers::sqrt2 * config.kappa);
  PlotSpec plot{"Two-photon coincidence, |1,1> input", "z (cm)", "coincidence rate", "z",
                {"coincidence_hermitian", "coincidence_lossy"}, {{dip.z_hermitian, "z_H"}}, std::make_pair(ep_limit, dip.z_hermitian)};
  p.notes["z_hermitian_cm"] = fmt_num(dip.z_hermitian);
  p.notes["dip_region_lower_cm"] = fmt_num(ep_limit);
  if (dip.z_dip) {
    plot.markers.push_back({*dip.z_dip, "z_0"});
    p.notes["z_dip_cm"] = fmt_num(*dip.z_dip);
  } else {
    p.notes["z_dip_cm"] = "none (broken phase)";
  }
  table.plot = std::move(plot);
  return table;
}

ResultTable ratio_figure(const RunConfig& config) {
  const CouplerParams hermitian(config.kappa, 0.0);
  const CouplerParams lossy(config.kappa, config.gamma);
  const auto basis = build_basis(std::max(config.truncation, 1));
  const auto l_herm = build_liouvillian(basis, hermitian);
  const auto l_lossy = build_liouvillian(basis, lossy);
  const auto zs = parse_grid(config.z_grid);

  ResultTable table;
  table.name = "fig3";
  table.columns = {"z", "ratio_hermitian", "ratio_lossy_input_R", "ratio_lossy_input_L", "residual"};
  table.rows.resize(zs.size());
  parallel_for(zs.size(), config.workers, [&](std::size_t i) {
    const auto h = single_photon_map(evolution_operator(l_herm, zs[i]), basis);
    const auto m = single_photon_map(evolution_operator(l_lossy, zs[i]), basis);
    const double herm = h.ll / (h.ll + h.rl);
    const double in_r = m.rr / (m.rr + m.lr);
    const double in_l = m.ll / (m.ll + m.rl);
    const double residual = std::max({max_abs_diff(herm, intensity_ratio(hermitian, zs[i], Mode::L)),
                                      max_abs_diff(in_r, intensity_ratio(lossy, zs[i], Mode::R)),
                                      max_abs_diff(in_l, intensity_ratio(lossy, zs[i], Mode::L))});
    table.rows[i] = {zs[i], herm, in_r, in_l, residual};
  });

  double worst = 0.0;
  for (double r : table.numeric_column("residual")) worst = std::max(worst, r);
  auto& p = table.provenance = make_provenance(config, "figure fig3");
  p.residuals.push_back({"engine_vs_transfer_matrix", worst, kResidualThreshold});
  p.notes["kappa"] = fmt_num(config.kappa);
  p.notes["gamma"] = fmt_num(config.gamma);
  p.notes["ratio_definition"] = "excited-waveguide power / total surviving power";
  const double half = hermitian.coupling_length() / 2.0;
  p.notes["half_coupling_length_cm"] = fmt_num(half);
  table.plot = PlotSpec{"Output intensity ratio", "z (cm)", "intensity ratio", "z",
                        {"ratio_hermitian", "ratio_lossy_input_R", "ratio_lossy_input_L"}, {{half, "L_c/2"}}, std::nullopt};
  return table;
}

ResultTable dip_shift_figure(const RunConfig& config) {
  struct Family {
    std::string column;
    CouplerParams params;
    double target;
  };
  std::vector<Family> families{
      {"coincidence_hermitian", CouplerParams(config.kappa, 0.0), kHermitianVisibility},
      {"coincidence_lossy", CouplerParams(config.kappa, config.gamma), kLossyVisibility},
      {"coincidence_shift_matched", CouplerParams(config.kappa, kShiftMatchedGamma), kLossyVisibility},
  };
  const auto basis = build_basis(std::max(config.truncation, 2));
  const auto zs = parse_grid(config.z_grid);
  const auto pair = DensityMatrix::pure(basis, {1, 1});

  ResultTable table;
  table.name = "fig4c";
  table.columns = {"z"};
  for (const auto& f : families) table.columns.push_back(f.column);
  table.columns.push_back("residual");
  table.rows.assign(zs.size(), std::vector<Cell>(table.columns.size()));
  auto& p = table.provenance = make_provenance(config, "figure fig4c");
  PlotSpec plot{"Zero-delay coincidence vs propagation length", "z (cm)", "coincidence rate", "z", {}, {}, std::nullopt};

  std::vector<double> row_residual(zs.size(), 0.0);
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& fam = families[f];
    const double mu = calibrate_mode_overlap(fam.params, fam.target, config.sigma_t);
    const DistinguishabilityModel model(config.sigma_t, mu);
    const auto superop = build_liouvillian(basis, fam.params);
    parallel_for(zs.size(), config.workers, [&](std::size_t i) {
      // Engine route: two-photon propagation for the indistinguishable part,
      // products of single-photon marginals for the distinguishable part.
      const CMatrix evolution = evolution_operator(superop, zs[i]);
      const double indist = coincidence(evolve(evolution, pair));
      const auto m = single_photon_map(evolution, basis);
      const double dist = m.ll * m.rr + m.rl * m.lr;
      const double engine = mu * indist + (1.0 - mu) * dist;
      const double closed = coincidence_with_delay(fam.params, zs[i], 0.0, model);
      table.rows[i][0] = zs[i];
      table.rows[i][f + 1] = engine;
      row_residual[i] = std::max(row_residual[i], std::abs(engine - closed));
    });
    plot.y_columns.push_back(fam.column);
    const auto [lo, hi] = default_dip_bracket(fam.params);
    const auto located = locate_dip_z(fam.params, model, lo, hi);
    const std::string tag = fam.column.substr(std::string("coincidence_").size());
    p.notes[fmt::format("{}.gamma", tag)] = fmt_num(fam.params.gamma());
    p.notes[fmt::format("{}.mu", tag)] = fmt_num(mu);
    p.notes[fmt::format("{}.visibility_target", tag)] = fmt_num(fam.target);
    if (located) {
      p.notes[fmt::format("{}.z_dip_cm", tag)] = fmt_num(located->z);
      plot.markers.push_back({located->z, fmt::format("dip ({})", tag)});
    }
  }
  for (std::size_t i = 0; i < zs.size(); ++i) table.rows[i].back() = row_residual[i];
  p.residuals.push_back({"engine_vs_closed_form", *std::max_element(row_residual.begin(), row_residual.end()),
                         kResidualThreshold});
  p.notes["reference.measured_dip_hermitian_cm"] = "3.0";
  p.notes["reference.measured_dip_lossy_cm"] = "2.8 (gamma 0.13 +- 0.04 per cm)";
  table.plot = std::move(plot);
  return table;
}

}  // namespace

std::vector<ResultTable> cmd_propagate(const RunConfig& config) {
  config.validate();
  const CouplerParams params(config.kappa, config.gamma);
  const auto basis = build_basis(config.truncation);
  const auto superop = build_liouvillian(basis, params);
  const FockState input = parse_input_state(config.input, config.truncation);
  const auto rho0 = DensityMatrix::pure(basis, input);
  const auto zs = parse_grid(config.z_grid);
  const bool pair_columns = input.total() >= 2;
  // Closed forms: mean photon numbers are linear in the single-photon map for
  // any Fock input; the coincidence has one for two-photon inputs.
  const bool analytic_coincidence = input.total() == 2;

  ResultTable table;
  table.name = "propagate";
  table.columns = {"z", "pop_L", "pop_R", "trace"};
  if (pair_columns) table.columns.push_back("coincidence");
  table.columns.insert(table.columns.end(), {"pop_L_analytic", "pop_R_analytic"});
  if (analytic_coincidence) table.columns.push_back("coincidence_analytic");
  table.columns.push_back("residual");
  table.rows.resize(zs.size());

  parallel_for(zs.size(), config.workers, [&](std::size_t i) {
    const auto obs = observe(propagate(rho0, superop, zs[i]));
    const auto u = transfer_matrix(params, zs[i]);
    const double pl = input.n_left * std::norm(u.ll) + input.n_right * std::norm(u.lr);
    const double pr = input.n_left * std::norm(u.rl) + input.n_right * std::norm(u.rr);
    double residual = std::max(std::abs(obs.pop_l - pl), std::abs(obs.pop_r - pr));
    std::vector<Cell> row{zs[i], obs.pop_l, obs.pop_r, obs.trace};
    if (pair_columns) row.emplace_back(obs.coincidence);
    row.insert(row.end(), {Cell(pl), Cell(pr)});
    if (analytic_coincidence) {
      double closed = 0.0;
      if (input.n_left == 1) {
        closed = permanent_coincidence(params, zs[i]);
      } else if (input.n_left == 2) {
        closed = 2.0 * std::norm(u.ll) * std::norm(u.rl);
      } else {
        closed = 2.0 * std::norm(u.lr) * std::norm(u.rr);
      }
      residual = std::max(residual, std::abs(obs.coincidence - closed));
      row.emplace_back(closed);
    }
    row.emplace_back(residual);
    table.rows[i] = std::move(row);
  });

  auto& p = table.provenance = make_provenance(config, "propagate");
  double worst = 0.0;
  for (double r : table.numeric_column("residual")) worst = std::max(worst, r);
  p.residuals.push_back({"engine_vs_closed_form", worst, kResidualThreshold});
  if (ascending(zs)) {
    double increase = 0.0;
    const auto traces = table.numeric_column("trace");
    for (std::size_t i = 1; i < traces.size(); ++i) increase = std::max(increase, traces[i] - traces[i - 1]);
    p.residuals.push_back({"trace_increase", increase, 1e-12});
  }
  p.notes["kappa"] = fmt_num(params.kappa());
  p.notes["gamma"] = fmt_num(params.gamma());
  p.notes["regime"] = std::string(to_string(params.regime()));
  p.notes["input"] = fmt::format("|{},{}>", input.n_left, input.n_right);
  p.notes["truncation"] = std::to_string(config.truncation);

  PlotSpec plot{fmt::format("Propagation of |{},{}>", input.n_left, input.n_right), "z (cm)", "expectation", "z",
                {"pop_L", "pop_R", "trace"}, {{params.coupling_length() / 2.0, "L_c/2"}}, std::nullopt};
  if (pair_columns) plot.y_columns.push_back("coincidence");
  table.plot = std::move(plot);
  return {std::move(table)};
}

std::vector<ResultTable> cmd_hom(const RunConfig& config) {
  config.validate();
  const CouplerParams params(config.kappa, config.gamma);
  const auto zs = parse_grid(config.z_grid);
  const auto taus = parse_grid(config.delay_grid);
  if (taus.size() < 5) throw ConfigError("delay_grid needs at least 5 points for the Gaussian fit");
  const double mu = config.visibility_target ? calibrate_mode_overlap(params, *config.visibility_target, config.sigma_t)
                                             : config.mu;
  const DistinguishabilityModel model(config.sigma_t, mu);
  const auto scan = hom_scan(params, model, zs, taus, config.workers);

  ResultTable surface;
  surface.name = "hom_surface";
  surface.columns = {"z", "tau", "coincidence"};
  for (std::size_t i = 0; i < scan.zs.size(); ++i) {
    for (std::size_t k = 0; k < scan.taus.size(); ++k) {
      surface.rows.push_back({scan.zs[i], scan.taus[k], scan.surface[i][k]});
    }
  }

  ResultTable fits;
  fits.name = "hom_fits";
  fits.columns = {"z", "center", "depth", "width", "baseline", "depth_over_baseline", "visibility",
                  "rms_residual", "iterations", "converged"};
  double fit_residual = 0.0;
  int failures = 0;
  for (std::size_t i = 0; i < scan.zs.size(); ++i) {
    const auto& f = scan.fits[i];
    const auto& v = scan.visibilities[i];
    Cell ratio = f.baseline > 0.0 ? Cell(f.depth / f.baseline) : Cell();
    fits.rows.push_back({scan.zs[i], f.center, f.depth, f.width, f.baseline, ratio, v ? Cell(*v) : Cell(),
                         f.rms_residual, static_cast<double>(f.iterations), std::string(f.converged ? "yes" : "no")});
    if (!f.converged) {
      ++failures;
    } else if (v && f.baseline > 0.0) {
      fit_residual = std::max(fit_residual, std::abs(f.depth / f.baseline - *v));
    }
  }

  double asymmetry = 0.0;
  bool symmetric_grid = true;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (std::abs(taus[k] + taus[taus.size() - 1 - k]) > 1e-12) symmetric_grid = false;
  }
  if (symmetric_grid) {
    for (const auto& row : scan.surface) {
      for (std::size_t k = 0; k < row.size(); ++k) asymmetry = std::max(asymmetry, std::abs(row[k] - row[row.size() - 1 - k]));
    }
  }

  for (auto* t : {&surface, &fits}) {
    auto& p = t->provenance = make_provenance(config, "hom");
    p.notes["kappa"] = fmt_num(params.kappa());
    p.notes["gamma"] = fmt_num(params.gamma());
    p.notes["mu"] = fmt_num(mu);
    p.notes["sigma_t"] = fmt_num(config.sigma_t);
    if (config.visibility_target) p.notes["visibility_target"] = fmt_num(*config.visibility_target);
    if (symmetric_grid) p.residuals.push_back({"delay_asymmetry", asymmetry, 1e-12});
  }
  fits.provenance.residuals.push_back({"fit_depth_ratio_vs_visibility", fit_residual, kResidualThreshold});
  fits.provenance.notes["fit_failures"] = std::to_string(failures);
  fits.plot = PlotSpec{"HOM visibility", "z (cm)", "visibility", "z", {"visibility", "depth_over_baseline"}, {}, std::nullopt};
  return {std::move(surface), std::move(fits)};
}

std::vector<ResultTable> cmd_dip(const RunConfig& config) {
  config.validate();
  const auto gammas = parse_grid(config.gammas);
  const DistinguishabilityModel model(config.sigma_t, config.mu);

  ResultTable table;
  table.name = "dip";
  table.columns = {"gamma", "regime", "z_H", "z_0", "z_star", "coincidence_at_z_star", "shift", "z0_continued", "flag"};
  double locate_residual = 0.0;
  double identity_residual = 0.0;
  for (double gamma : gammas) {
    const CouplerParams params(config.kappa, gamma);
    const auto report = dip_positions(params);
    std::vector<Cell> row{gamma, std::string(to_string(report.regime)), report.z_hermitian};
    if (report.z_dip) {
      const auto [lo, hi] = default_dip_bracket(params);
      const auto located = locate_dip_z(params, model, lo, hi);
      row.emplace_back(*report.z_dip);
      row.emplace_back(located ? Cell(located->z) : Cell());
      row.emplace_back(located ? Cell(located->coincidence) : Cell());
      row.emplace_back(*report.shift);
      if (located && config.mu == 1.0) locate_residual = std::max(locate_residual, std::abs(located->z - *report.z_dip));
      identity_residual = std::max(identity_residual, report.identity_residual);
    } else {
      row.insert(row.end(), {Cell(), Cell(), Cell(), Cell()});
    }
    row.emplace_back(report.z_continued ? Cell(*report.z_continued) : Cell());
    row.emplace_back(dip_flag(report.regime));
    table.rows.push_back(std::move(row));
  }
  auto& p = table.provenance = make_provenance(config, "dip");
  if (config.mu == 1.0) p.residuals.push_back({"located_vs_analytic_dip", locate_residual, 1e-6});
  p.residuals.push_back({"arcsin_vs_arccos_dip", identity_residual, 1e-12});
  p.notes["kappa"] = fmt_num(config.kappa);
  p.notes["mu"] = fmt_num(config.mu);
  p.notes["exceptional_point_limit_cm"] = fmt_num(1.0 / (std::numbers::sqrt2 * config.kappa));
  p.notes["reference.measured_dip_hermitian_cm"] = "3.0";
  p.notes["reference.measured_dip_lossy_cm"] = "2.8 (gamma 0.13 +- 0.04 per cm)";
  return {std::move(table)};
}

RunConfig apply_figure_preset(RunConfig config, std::string_view preset) {
  auto fill = [&](std::string_view key, std::string_view value) {
    if (!config.is_explicit(key)) {
      config.set(key, value);
      config.explicit_keys.erase(std::string(key));
    }
  };
  if (preset == "fig2a") {
    fill("kappa", "0.25");
    fill("gamma", "0");
    fill("z_grid", "0:12.6:0.02");
  } else if (preset == "fig2b") {
    fill("kappa", "0.25");
    fill("gamma", "0.35");
    fill("z_grid", "0:12.6:0.02");
  } else if (preset == "fig2c") {
    fill("kappa", "0.25");
    fill("gamma", "0.35");
    fill("z_grid", "0:8:0.02");
  } else if (preset == "fig3") {
    fill("kappa", "0.26");
    fill("gamma", "0.2");
    fill("z_grid", "0:6:0.02");
  } else if (preset == "fig4c") {
    fill("kappa", "0.26");
    fill("gamma", "0.13");
    fill("z_grid", "0:6:0.02");
  } else {
    throw ConfigError(fmt::format("unknown figure preset '{}' (expected fig2a, fig2b, fig2c, fig3, fig4c)", preset));
  }
  return config;
}

std::vector<ResultTable> cmd_figure(const RunConfig& config, std::string_view preset) {
  config.validate();
  if (preset == "fig2a") return {population_figure(config, "fig2a", "Single photon, lossless coupler")};
  if (preset == "fig2b") return {population_figure(config, "fig2b", "Single photon, lossy coupler")};
  if (preset == "fig2c") return {coincidence_figure(config)};
  if (preset == "fig3") return {ratio_figure(config)};
  if (preset == "fig4c") return {dip_shift_figure(config)};
  throw ConfigError(fmt::format("unknown figure preset '{}'", preset));
}

nlohmann::json cmd_superop(const RunConfig& config) {
  config.validate();
  const CouplerParams params(config.kappa, config.gamma);
  const auto superop = build_liouvillian(build_basis(config.truncation), params);
  return {{"schema_version", kSchemaVersion},
          {"engine_version", kEngineVersion},
          {"config_hash", config.hash()},
          {"superoperator", to_json(superop)},
          {"spectrum", to_json(spectral_decompose(superop))}};
}

}  // namespace ptq
