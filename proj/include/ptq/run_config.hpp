#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ptq/fock_space.hpp"

namespace ptq {

/// Parses "start:stop:step" (inclusive of both ends; the last point is clamped
/// to stop) or a comma-separated list of values. Throws ConfigError.
std::vector<double> parse_grid(std::string_view spec);

/// Parses "n_L,n_R" against a truncation. Throws ConfigError naming the
/// offending token.
FockState parse_input_state(std::string_view spec, int truncation);

/// Every setting of a CLI run. Keys of the flat config format are the member
/// names; metadata entries are written as "metadata.<key> = <value>".
struct RunConfig {
  double kappa = 0.25;
  double gamma = 0.0;
  int truncation = 2;
  std::string input = "1,1";
  std::string z_grid = "0:8:0.04";
  std::string delay_grid = "-4:4:0.1";
  std::string gammas = "0,0.13,0.2,0.4";
  double sigma_t = 1.0;
  double mu = 1.0;
  std::optional<double> visibility_target;
  std::string out_dir = ".";
  std::vector<std::string> formats = {"csv"};
  unsigned workers = 1;
  std::map<std::string, std::string> metadata;

  /// Keys assigned from a file or flag rather than left at their defaults.
  std::set<std::string> explicit_keys;

  /// Assigns one key from its textual value. Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  bool is_explicit(std::string_view key) const { return explicit_keys.count(std::string(key)) > 0; }
  bool wants(std::string_view format) const;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  /// Sorted "key=value" lines of everything that affects results. Output
  /// location and worker count are excluded.
  std::string canonical() const;
  /// "fnv1a64:<16 hex digits>" of canonical().
  std::string hash() const;
};

/// Reads a flat "key = value" file ('#' comments) or, for a .json path or a
/// document starting with '{', a JSON object with the same keys.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace ptq
