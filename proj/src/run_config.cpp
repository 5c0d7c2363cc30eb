#include "ptq/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ptq/errors.hpp"

namespace ptq {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    const auto end = s.find(sep, begin);
    parts.push_back(trim(s.substr(begin, end == std::string_view::npos ? end : end - begin)));
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }
  return parts;
}

double parse_double(std::string_view token, std::string_view what) {
  double value = 0.0;
  const auto t = trim(token);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", what, token));
  }
  return value;
}

long parse_integer(std::string_view token, std::string_view what) {
  long value = 0;
  const auto t = trim(token);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", what, token));
  }
  return value;
}

// Shortest round-trip representation; stable across runs.
std::string number(double v) { return fmt::format("{}", v); }

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty()) throw ConfigError("grid spec is empty");
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw ConfigError(fmt::format("grid '{}': expected start:stop:step", spec));
    const double start = parse_double(parts[0], "grid start");
    const double stop = parse_double(parts[1], "grid stop");
    const double step = parse_double(parts[2], "grid step");
    if (!(step > 0.0)) throw ConfigError(fmt::format("grid '{}': step must be positive", spec));
    if (!(stop > start)) throw ConfigError(fmt::format("grid '{}': stop must exceed start", spec));
    // Intervals are counted with a small slack so that 0:1:0.1 has exactly
    // ten of them despite rounding in (stop - start) / step.
    const auto intervals = static_cast<long>(std::ceil((stop - start) / step - 1e-9));
    if (intervals > 10'000'000) throw ConfigError(fmt::format("grid '{}' has too many points", spec));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(intervals + 1));
    for (long k = 0; k < intervals; ++k) grid.push_back(start + static_cast<double>(k) * step);
    grid.push_back(stop);
    return grid;
  }
  std::vector<double> grid;
  for (auto token : split(spec, ',')) grid.push_back(parse_double(token, "grid value"));
  return grid;
}

FockState parse_input_state(std::string_view spec, int truncation) {
  const auto parts = split(spec, ',');
  if (parts.size() != 2) {
    throw ConfigError(fmt::format("input '{}': expected two occupations 'n_L,n_R'", spec));
  }
  int occ[2] = {0, 0};
  for (int m = 0; m < 2; ++m) {
    long n = 0;
    try {
      n = parse_integer(parts[static_cast<std::size_t>(m)], "input occupation");
    } catch (const ConfigError&) {
      throw ConfigError(fmt::format("input '{}': token '{}' is not a photon number", spec, parts[static_cast<std::size_t>(m)]));
    }
    if (n < 0 || n > truncation) {
      throw ConfigError(fmt::format("input '{}': token '{}' outside 0..{} (truncation)", spec,
                                    parts[static_cast<std::size_t>(m)], truncation));
    }
    occ[m] = static_cast<int>(n);
  }
  if (occ[0] + occ[1] > truncation) {
    throw ConfigError(fmt::format("input '{}': total photon number {} exceeds truncation {}", spec,
                                  occ[0] + occ[1], truncation));
  }
  return {occ[0], occ[1]};
}

void RunConfig::set(std::string_view key_view, std::string_view raw) {
  const std::string key(trim(key_view));
  const auto value = trim(raw);
  if (key == "kappa") {
    kappa = parse_double(value, key);
  } else if (key == "gamma") {
    gamma = parse_double(value, key);
  } else if (key == "truncation") {
    const long n = parse_integer(value, key);
    if (n < 0 || n > 64) throw ConfigError(fmt::format("truncation {} outside 0..64", n));
    truncation = static_cast<int>(n);
  } else if (key == "input") {
    input = std::string(value);
  } else if (key == "z_grid") {
    z_grid = std::string(value);
  } else if (key == "delay_grid") {
    delay_grid = std::string(value);
  } else if (key == "gammas") {
    gammas = std::string(value);
  } else if (key == "sigma_t") {
    sigma_t = parse_double(value, key);
  } else if (key == "mu") {
    mu = parse_double(value, key);
  } else if (key == "visibility_target") {
    visibility_target = parse_double(value, key);
  } else if (key == "out_dir") {
    out_dir = std::string(value);
  } else if (key == "format" || key == "formats") {
    formats.clear();
    for (auto f : split(value, ',')) formats.emplace_back(f);
  } else if (key == "workers") {
    const long n = parse_integer(value, key);
    if (n < 1 || n > 1024) throw ConfigError(fmt::format("workers {} outside 1..1024", n));
    workers = static_cast<unsigned>(n);
  } else if (key.rfind("metadata.", 0) == 0 && key.size() > 9) {
    metadata[key.substr(9)] = std::string(value);
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  explicit_keys.insert(key == "formats" ? "format" : key);
}

bool RunConfig::wants(std::string_view format) const {
  for (const auto& f : formats) {
    if (f == format) return true;
  }
  return false;
}

void RunConfig::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(sigma_t > 0.0)) throw ConfigError("sigma_t must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in [0, 1]");
  if (visibility_target && !(*visibility_target > 0.0 && *visibility_target <= 1.0)) {
    throw ConfigError("visibility_target must lie in (0, 1]");
  }
  for (const auto& z : parse_grid(z_grid)) {
    if (z < 0.0) throw ConfigError(fmt::format("z_grid '{}': propagation lengths must be non-negative", z_grid));
  }
  parse_grid(delay_grid);
  for (const auto& g : parse_grid(gammas)) {
    if (g < 0.0) throw ConfigError(fmt::format("gammas '{}': loss rates must be non-negative", gammas));
  }
  parse_input_state(input, truncation);
  if (formats.empty()) throw ConfigError("at least one output format is required");
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "svg") {
      throw ConfigError(fmt::format("unknown output format '{}' (expected csv, json, svg)", f));
    }
  }
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> fields{
      {"kappa", number(kappa)},
      {"gamma", number(gamma)},
      {"truncation", std::to_string(truncation)},
      {"input", input},
      {"z_grid", z_grid},
      {"delay_grid", delay_grid},
      {"gammas", gammas},
      {"sigma_t", number(sigma_t)},
      {"mu", number(mu)},
      {"visibility_target", visibility_target ? number(*visibility_target) : "none"},
  };
  for (const auto& [k, v] : metadata) fields["metadata." + k] = v;
  std::string out;
  for (const auto& [k, v] : fields) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return fmt::format("fnv1a64:{:016x}", fnv1a64(canonical())); }

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (path.extension() == ".json" || (first != std::string::npos && text[first] == '{')) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(fmt::format("config '{}': {}", path.string(), e.what()));
    }
    if (!doc.is_object()) throw ConfigError(fmt::format("config '{}': expected a JSON object", path.string()));
    for (const auto& [key, value] : doc.items()) {
      if (key == "metadata" && value.is_object()) {
        for (const auto& [mk, mv] : value.items()) {
          config.set("metadata." + mk, mv.is_string() ? mv.get<std::string>() : mv.dump());
        }
      } else if (value.is_string()) {
        config.set(key, value.get<std::string>());
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ",";
          joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        config.set(key, joined);
      } else {
        config.set(key, value.dump());
      }
    }
    return;
  }

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto content = trim(std::string_view(line).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", path.string(), lineno));
    }
    config.set(content.substr(0, eq), content.substr(eq + 1));
  }
}

}  // namespace ptq
