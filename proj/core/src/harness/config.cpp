#include "capg/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "capg/format.hpp"

namespace capg::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = s.find(',');
    items.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return items;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("config key '" + std::string(key) + "': not an integer: '" +
                      std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view text) {
  try {
    const double v = parse_real(text);
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("config key '" + std::string(key) + "': not a finite real: '" +
                      std::string(text) + "'");
  }
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view)>;

template <typename T>
Setter size_setter(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_int<T>(k, v);
  };
}

Setter real_setter(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_double(k, v);
  };
}

Setter real_list_setter(std::vector<double> ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    std::vector<double> out;
    for (const auto item : split_list(v)) out.push_back(parse_double(k, item));
    c.*field = std::move(out);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"experiment", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.experiment = parse_experiment(v);
       }},
      {"estimator", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.estimator = parse_estimator_selection(v);
       }},
      {"d", size_setter(&ExperimentConfig::d)},
      {"init_mean", real_setter(&ExperimentConfig::init_mean)},
      {"init_var", real_setter(&ExperimentConfig::init_var)},
      {"bound_low", real_setter(&ExperimentConfig::bound_low)},
      {"bound_high", real_setter(&ExperimentConfig::bound_high)},
      {"batch_size", size_setter(&ExperimentConfig::batch_size)},
      {"updates", size_setter(&ExperimentConfig::updates)},
      {"seeds", [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         std::vector<std::int64_t> out;
         for (const auto item : split_list(v)) out.push_back(parse_int<std::int64_t>(k, item));
         c.seeds = std::move(out);
       }},
      {"master_seed", size_setter(&ExperimentConfig::master_seed)},
      {"baseline", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         if (v == "none") {
           c.baseline = BaselineMode::None;
         } else if (v == "batch-mean" || v == "batch_mean") {
           c.baseline = BaselineMode::BatchMean;
         } else {
           throw ConfigError("config key 'baseline': expected none or batch-mean");
         }
       }},
      {"smoothing_window", size_setter(&ExperimentConfig::smoothing_window)},
      {"adam_lr", real_setter(&ExperimentConfig::adam_lr)},
      {"output", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.output_path = std::string(v);
       }},
      {"checkpoint", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.checkpoint_path = std::string(v);
       }},
      {"mc_batches", size_setter(&ExperimentConfig::mc_batches)},
      {"grid_means", real_list_setter(&ExperimentConfig::grid_means)},
      {"grid_vars", real_list_setter(&ExperimentConfig::grid_vars)},
      {"gamma", real_setter(&ExperimentConfig::gamma)},
      {"horizon", size_setter(&ExperimentConfig::horizon)},
      {"init_state_std", real_setter(&ExperimentConfig::init_state_std)},
      {"penalty", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         const auto mode = parse_penalty_mode(v);
         if (!mode) throw ConfigError("config key 'penalty': expected none, clipped or preclip");
         c.penalty = *mode;
       }},
      {"penalty_coef", real_setter(&ExperimentConfig::penalty_coef)},
      {"weighting", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         const auto w = parse_weighting(v);
         if (!w) throw ConfigError("config key 'weighting': expected gamma_t or flat");
         c.weighting = *w;
       }},
      {"verify_samples", size_setter(&ExperimentConfig::verify_samples)},
      {"verify_fd_configs", size_setter(&ExperimentConfig::verify_fd_configs)},
  };
  return table;
}

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::Variance:
      return "variance";
    case Experiment::Bandit:
      return "bandit";
    case Experiment::Mdp:
      return "mdp";
    case Experiment::Verify:
      return "verify";
  }
  return "bandit";
}

Experiment parse_experiment(std::string_view text) {
  if (text == "variance") return Experiment::Variance;
  if (text == "bandit") return Experiment::Bandit;
  if (text == "mdp") return Experiment::Mdp;
  if (text == "verify") return Experiment::Verify;
  throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

std::vector<EstimatorKind> selected_estimators(EstimatorSelection sel) {
  switch (sel) {
    case EstimatorSelection::PG:
      return {EstimatorKind::PG};
    case EstimatorSelection::CAPG:
      return {EstimatorKind::CAPG};
    case EstimatorSelection::Both:
      return {EstimatorKind::PG, EstimatorKind::CAPG};
  }
  return {};
}

EstimatorSelection parse_estimator_selection(std::string_view text) {
  if (text == "pg") return EstimatorSelection::PG;
  if (text == "capg") return EstimatorSelection::CAPG;
  if (text == "both") return EstimatorSelection::Both;
  throw ConfigError("unknown estimator '" + std::string(text) + "' (expected pg, capg or both)");
}

IntegratorMdp ExperimentConfig::mdp() const {
  IntegratorMdp env;
  env.gamma = gamma;
  env.horizon = horizon;
  env.bounds = ActionBounds::uniform(1, bound_low, bound_high);
  env.init_state_std = init_state_std;
  env.penalty = penalty;
  env.penalty_coef = penalty_coef;
  return env;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (experiment != Experiment::Mdp && updates < 1) throw ConfigError("updates must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (!(init_var > 0.0)) throw ConfigError("init_var must be > 0");
  if (!(bound_low < bound_high)) throw ConfigError("bound_low must be < bound_high");
  if (smoothing_window < 1) throw ConfigError("smoothing_window must be >= 1");
  if (!(adam_lr > 0.0)) throw ConfigError("adam_lr must be > 0");
  if (mc_batches < 2) throw ConfigError("mc_batches must be >= 2");
  if (grid_means.empty() || grid_vars.empty()) throw ConfigError("variance grid must be nonempty");
  for (const double v : grid_vars) {
    if (!(v > 0.0)) throw ConfigError("grid_vars entries must be > 0");
  }
  if (verify_samples < 1000) throw ConfigError("verify_samples must be >= 1000");
  if (experiment == Experiment::Mdp) {
    try {
      mdp().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(cfg, key, value);
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    set_config_value(base, key, value);
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace capg::harness
