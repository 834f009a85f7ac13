#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "memcap/experiment.hpp"
#include "tagged_params.hpp"

namespace memcap {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof())
    throw std::invalid_argument("config: key '" + key + "' has an invalid value '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto lower = detail::lowercase(text);
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + text + "'");
}

std::optional<std::pair<double, double>> parse_bounds(const std::string& text) {
  if (detail::lowercase(text) == "auto") return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("config: sigma_bounds must be 'auto' or 'lower, upper'");
  return std::make_pair(parse_value<double>("sigma_bounds", text.substr(0, comma)),
                        parse_value<double>("sigma_bounds", text.substr(comma + 1)));
}

std::string number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void validate(const SweepConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("config: n must be >= 2");
  if (!(cfg.spectral_norm > 0.0 && cfg.spectral_norm < 1.0))
    throw std::invalid_argument("config: spectral_norm must lie in (0, 1)");
  if (cfg.grid.count < 2) throw std::invalid_argument("config: sigma_count must be >= 2");
  if (cfg.grid.bounds) {
    const auto [lo, hi] = *cfg.grid.bounds;
    if (!(lo > 0.0 && hi > lo && std::isfinite(hi)))
      throw std::invalid_argument("config: sigma bounds must satisfy 0 < lower < upper");
  }
  if (cfg.trajectory_length < cfg.n + 2)
    throw std::invalid_argument("config: trajectory_length must exceed n + 1");
  if (cfg.washout && *cfg.washout < 0) throw std::invalid_argument("config: washout must be >= 0");
  if (cfg.replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (cfg.tau_max && *cfg.tau_max < 1) throw std::invalid_argument("config: tau_max must be >= 1");
  if (cfg.tau_max && *cfg.tau_max >= cfg.trajectory_length - cfg.n)
    throw std::invalid_argument("config: tau_max must be below trajectory_length - n");
  if (cfg.ridge && !(*cfg.ridge >= 0.0)) throw std::invalid_argument("config: ridge must be >= 0");
}

SweepConfig parse_sweep_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  // Accept either top-level keys or a single [sweep] section.
  if (auto section = tree.get_child_optional("sweep"); section && !section->empty()) {
    pt::ptree flat = *section;
    tree.erase("sweep");
    for (auto& kv : tree) flat.push_back(kv);
    tree = std::move(flat);
  }

  SweepConfig cfg;
  static const std::set<std::string> known = {
      "n",        "spectral_norm", "ensemble", "activation",   "sigma_count",     "sigma_bounds",
      "trajectory_length", "washout", "replications", "tau_max", "ridge", "base_seed",
      "fixed_reservoir", "keep_profiles"};
  for (const auto& [raw_key, node] : tree) {
    if (!node.empty()) throw std::invalid_argument("config: unexpected section [" + raw_key + "]");
    const std::string key = detail::lowercase(raw_key);
    const std::string value = node.data();
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + raw_key + "'");
    if (key == "n") cfg.n = parse_value<int>(key, value);
    else if (key == "spectral_norm") cfg.spectral_norm = parse_value<double>(key, value);
    else if (key == "ensemble") cfg.ensemble = parse_ensemble(value);
    else if (key == "activation") cfg.activation = Activation::parse(value);
    else if (key == "sigma_count") cfg.grid.count = parse_value<int>(key, value);
    else if (key == "sigma_bounds") cfg.grid.bounds = parse_bounds(value);
    else if (key == "trajectory_length") cfg.trajectory_length = parse_value<int>(key, value);
    else if (key == "washout") cfg.washout = parse_value<int>(key, value);
    else if (key == "replications") cfg.replications = parse_value<int>(key, value);
    else if (key == "tau_max") cfg.tau_max = parse_value<int>(key, value);
    else if (key == "ridge") cfg.ridge = parse_value<double>(key, value);
    else if (key == "base_seed") cfg.base_seed = parse_value<std::uint64_t>(key, value);
    else if (key == "fixed_reservoir") cfg.fixed_reservoir = parse_bool(key, value);
    else if (key == "keep_profiles") cfg.keep_profiles = parse_bool(key, value);
  }
  validate(cfg);
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path.string() + "'");
  return parse_sweep_config(in);
}

std::string format_sweep_config(const SweepConfig& cfg) {
  std::string out;
  out += fmt::format("n = {}\n", cfg.n);
  out += fmt::format("spectral_norm = {}\n", number(cfg.spectral_norm));
  out += fmt::format("ensemble = {}\n", to_string(cfg.ensemble));
  out += fmt::format("activation = {}\n", to_string(cfg.activation));
  out += fmt::format("sigma_count = {}\n", cfg.grid.count);
  if (cfg.grid.bounds) {
    out += fmt::format("sigma_bounds = {}, {}\n", number(cfg.grid.bounds->first),
                       number(cfg.grid.bounds->second));
  } else {
    out += "sigma_bounds = auto\n";
  }
  out += fmt::format("trajectory_length = {}\n", cfg.trajectory_length);
  if (cfg.washout) out += fmt::format("washout = {}\n", *cfg.washout);
  out += fmt::format("replications = {}\n", cfg.replications);
  if (cfg.tau_max) out += fmt::format("tau_max = {}\n", *cfg.tau_max);
  if (cfg.ridge) out += fmt::format("ridge = {}\n", number(*cfg.ridge));
  out += fmt::format("base_seed = {}\n", cfg.base_seed);
  out += fmt::format("fixed_reservoir = {}\n", cfg.fixed_reservoir);
  out += fmt::format("keep_profiles = {}\n", cfg.keep_profiles);
  return out;
}

}  // namespace memcap
