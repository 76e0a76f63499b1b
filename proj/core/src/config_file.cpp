#include "stage/cli/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <set>
#include <string_view>

namespace stage::cli {

namespace {

using sim::RunConfig;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(const std::string& key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

// "48,32;40,24" -> one dim row per client, one entry per modality.
std::vector<std::vector<std::uint32_t>> parse_dims(const std::string& key,
                                                   std::string_view v) {
  std::vector<std::vector<std::uint32_t>> out;
  std::size_t start = 0;
  const std::string s(v);
  while (start <= s.size()) {
    auto stop = s.find(';', start);
    if (stop == std::string::npos) stop = s.size();
    const std::string row = s.substr(start, stop - start);
    std::vector<std::uint32_t> dims;
    std::size_t rs = 0;
    while (rs <= row.size()) {
      auto rc = row.find(',', rs);
      if (rc == std::string::npos) rc = row.size();
      dims.push_back(
          parse_number<std::uint32_t>(key, trim(row.substr(rs, rc - rs))));
      rs = rc + 1;
    }
    out.push_back(std::move(dims));
    start = stop + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& key,
                                       std::string_view v) {
  std::vector<std::uint64_t> out;
  const std::string s(v);
  std::size_t start = 0;
  while (start <= s.size()) {
    auto stop = s.find(',', start);
    if (stop == std::string::npos) stop = s.size();
    out.push_back(
        parse_number<std::uint64_t>(key, trim(s.substr(start, stop - start))));
    start = stop + 1;
  }
  return out;
}

std::string dims_string(const RunConfig& cfg) {
  std::string out;
  for (std::size_t k = 0; k < cfg.data.client_modality_dims.size(); ++k) {
    if (k) out += ';';
    const auto& row = cfg.data.client_modality_dims[k];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += std::to_string(row[c]);
    }
  }
  return out;
}

std::string seeds_string(const RunConfig& cfg) {
  std::string out;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(cfg.seeds[i]);
  }
  return out;
}

struct KeySpec {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Field>
KeySpec number_key(const char* key, Field field) {
  return {key,
          [key, field](RunConfig& c, const std::string& v) {
            c.*field = parse_number<T>(key, v);
          },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

template <typename T, typename Field>
KeySpec data_number_key(const char* key, Field field) {
  return {key,
          [key, field](RunConfig& c, const std::string& v) {
            c.data.*field = parse_number<T>(key, v);
          },
          [field](const RunConfig& c) { return std::to_string(c.data.*field); }};
}

template <typename Field>
KeySpec double_key(const char* key, Field field) {
  return {key,
          [key, field](RunConfig& c, const std::string& v) {
            c.*field = parse_number<double>(key, v);
          },
          [field](const RunConfig& c) { return sim::format_double(c.*field); }};
}

template <typename Field>
KeySpec data_double_key(const char* key, Field field) {
  return {key,
          [key, field](RunConfig& c, const std::string& v) {
            c.data.*field = parse_number<double>(key, v);
          },
          [field](const RunConfig& c) {
            return sim::format_double(c.data.*field);
          }};
}

using graph::SplitFractions;
using graph::SynthConfig;

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    t.push_back(data_number_key<std::uint32_t>("data.node_count",
                                               &SynthConfig::node_count));
    t.push_back(data_number_key<std::uint32_t>("data.class_count",
                                               &SynthConfig::class_count));
    t.push_back(data_double_key("data.p_in", &SynthConfig::p_in));
    t.push_back(data_double_key("data.p_out", &SynthConfig::p_out));
    t.push_back({"data.dims",
                 [](RunConfig& c, const std::string& v) {
                   c.data.client_modality_dims = parse_dims("data.dims", v);
                 },
                 dims_string});
    t.push_back(data_double_key("data.prototype_scale",
                                &SynthConfig::prototype_scale));
    t.push_back(data_double_key("data.noise_std", &SynthConfig::noise_std));
    t.push_back(data_double_key("data.mask_drop", &SynthConfig::mask_drop));
    t.push_back(data_number_key<std::uint64_t>("data.seed", &SynthConfig::seed));
    t.push_back(double_key("data.drift_alpha", &RunConfig::drift_alpha));
    t.push_back(double_key("data.noise_ratio", &RunConfig::noise_ratio));
    t.push_back({"partition.strategy",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.partition = sim::partition_from_string(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("partition.strategy", e.what());
                   }
                 },
                 [](const RunConfig& c) { return sim::to_string(c.partition); }});
    t.push_back(number_key<std::uint32_t>("model.anchor_count",
                                          &RunConfig::anchor_count));
    t.push_back(number_key<std::uint32_t>("model.protocol_dim",
                                          &RunConfig::protocol_dim));
    t.push_back(
        number_key<std::uint32_t>("model.gnn_hidden", &RunConfig::gnn_hidden));
    t.push_back(
        number_key<std::uint32_t>("model.gnn_layers", &RunConfig::gnn_layers));
    t.push_back(double_key("model.leaky_slope", &RunConfig::leaky_slope));
    t.push_back(double_key("stage.lambda_gap", &RunConfig::lambda_gap));
    t.push_back(double_key("stage.beta_entropy", &RunConfig::beta_entropy));
    t.push_back(double_key("stage.tau_s", &RunConfig::tau_s));
    t.push_back(double_key("stage.tau_c", &RunConfig::tau_c));
    t.push_back(number_key<std::uint32_t>("stage.n_min", &RunConfig::n_min));
    t.push_back(double_key("server.m_ema", &RunConfig::m_ema));
    t.push_back(double_key("server.eta_pi", &RunConfig::eta_pi));
    t.push_back(double_key("server.g_max", &RunConfig::g_max));
    t.push_back({"run.method",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.method = sim::method_from_string(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("run.method", e.what());
                   }
                 },
                 [](const RunConfig& c) { return sim::to_string(c.method); }});
    t.push_back({"run.task",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.task = sim::task_from_string(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("run.task", e.what());
                   }
                 },
                 [](const RunConfig& c) { return sim::to_string(c.task); }});
    t.push_back(number_key<std::uint32_t>("run.rounds", &RunConfig::rounds));
    t.push_back(number_key<std::uint32_t>("run.local_epochs",
                                          &RunConfig::local_epochs));
    t.push_back(double_key("run.learning_rate", &RunConfig::learning_rate));
    t.push_back({"run.train_fraction",
                 [](RunConfig& c, const std::string& v) {
                   c.splits.train = parse_number<double>("run.train_fraction", v);
                 },
                 [](const RunConfig& c) {
                   return sim::format_double(c.splits.train);
                 }});
    t.push_back({"run.val_fraction",
                 [](RunConfig& c, const std::string& v) {
                   c.splits.val = parse_number<double>("run.val_fraction", v);
                 },
                 [](const RunConfig& c) {
                   return sim::format_double(c.splits.val);
                 }});
    t.push_back({"run.test_fraction",
                 [](RunConfig& c, const std::string& v) {
                   c.splits.test = parse_number<double>("run.test_fraction", v);
                 },
                 [](const RunConfig& c) {
                   return sim::format_double(c.splits.test);
                 }});
    t.push_back({"run.seeds",
                 [](RunConfig& c, const std::string& v) {
                   c.seeds = parse_seeds("run.seeds", v);
                 },
                 seeds_string});
    t.push_back(number_key<std::uint32_t>("run.checkpoint_every",
                                          &RunConfig::checkpoint_every));
    t.push_back(number_key<std::uint32_t>("run.jobs", &RunConfig::jobs));
    t.push_back({"diagnostics.enabled",
                 [](RunConfig& c, const std::string& v) {
                   c.diagnostics = parse_bool("diagnostics.enabled", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.diagnostics ? "true" : "false");
                 }});
    t.push_back(number_key<std::uint32_t>("diagnostics.top_n",
                                          &RunConfig::top_n));
    return t;
  }();
  return table;
}

const KeySpec& lookup(const std::string& key) {
  for (const auto& spec : schema()) {
    if (key == spec.key) return spec;
  }
  throw ConfigError(key, "unknown key");
}

void apply_assignment(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  lookup(key).set(cfg, value);
}

}  // namespace

sim::RunConfig parse_config_text(const std::string& text,
                                 std::vector<std::string>* explicit_keys) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto stop = text.find('\n', start);
    if (stop == std::string::npos) stop = text.size();
    ++line_no;
    const auto line = trim(std::string_view(text).substr(start, stop - start));
    start = stop + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) +
                                ": expected 'section.key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) {
      throw ConfigError(key, "duplicate key");
    }
    apply_assignment(cfg, key, value);
  }
  if (explicit_keys) explicit_keys->assign(seen.begin(), seen.end());
  return cfg;
}

void apply_override(sim::RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(assignment, "expected section.key=value");
  }
  const std::string key(trim(std::string_view(assignment).substr(0, eq)));
  const std::string value(trim(std::string_view(assignment).substr(eq + 1)));
  apply_assignment(cfg, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& spec : schema()) keys.emplace_back(spec.key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string render_config_file(const sim::RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& spec : schema()) {
    const std::string key = spec.key;
    const auto this_section = key.substr(0, key.find('.'));
    if (this_section != section) {
      if (!out.empty()) out += '\n';
      section = this_section;
    }
    out += key;
    out += " = ";
    out += spec.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace stage::cli
