#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ptq/result_table.hpp"
#include "ptq/run_config.hpp"

namespace ptq {

/// Populations, trace and coincidence over the z grid from the Lindblad
/// engine, with closed-form columns and per-row residuals.
std::vector<ResultTable> cmd_propagate(const RunConfig& config);

/// Coincidence surface over (z, delay) plus per-z Gaussian fits and
/// visibilities. Returns the tables "hom_surface" and "hom_fits".
std::vector<ResultTable> cmd_hom(const RunConfig& config);

/// One row per loss rate in config.gammas: Hermitian dip, analytic dip,
/// numerically located dip and regime flag.
std::vector<ResultTable> cmd_dip(const RunConfig& config);

inline constexpr std::string_view kFigurePresets[] = {"fig2a", "fig2b", "fig2c", "fig3", "fig4c"};

/// Fills every key the preset defines unless the user set it explicitly.
/// Throws ConfigError for an unknown preset.
RunConfig apply_figure_preset(RunConfig config, std::string_view preset);

/// Data table (and plot spec) for one figure preset. The config is expected
/// to have gone through apply_figure_preset already.
std::vector<ResultTable> cmd_figure(const RunConfig& config, std::string_view preset);

/// Liouvillian and its spectrum as JSON, complex entries as [re, im].
nlohmann::json cmd_superop(const RunConfig& config);

}  // namespace ptq
