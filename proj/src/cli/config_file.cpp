#include "dmpc/cli/config_file.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dmpc/cli/format.hpp"

namespace dmpc::cli {

namespace {

struct BadValue {
  std::string what;
};

double to_real(std::string_view v) {
  v = trim(v);
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    const auto num = parse_double(v.substr(0, slash));
    const auto den = parse_double(v.substr(slash + 1));
    if (num && den && *den != 0.0) return *num / *den;
  } else if (const auto x = parse_double(v)) {
    return *x;
  }
  throw BadValue{"expected a number, got '" + std::string(v) + "'"};
}

std::uint64_t to_uint(std::string_view v) {
  if (const auto x = parse_uint(v)) return *x;
  throw BadValue{"expected a non-negative integer, got '" + std::string(trim(v)) + "'"};
}

bool to_bool(std::string_view v) {
  v = trim(v);
  if (v == "true") return true;
  if (v == "false") return false;
  throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

std::vector<double> to_list(std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (auto item : split(v, ',')) out.push_back(to_real(item));
  return out;
}

std::string list_text(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt17(xs[i]);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  // Returns nullopt for fields that are unset and therefore not emitted.
  std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <class Access>
Field real(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](ScenarioConfig& c, std::string_view v) { access(c) = to_real(v); },
          [access](const ScenarioConfig& c) {
            return std::optional<std::string>(fmt17(access(c)));
          }};
}

template <class T, class Access>
Field integer(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](ScenarioConfig& c, std::string_view v) {
            access(c) = static_cast<T>(to_uint(v));
          },
          [access](const ScenarioConfig& c) {
            return std::optional<std::string>(
                std::to_string(access(c)));
          }};
}

template <class Access>
Field boolean(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](ScenarioConfig& c, std::string_view v) { access(c) = to_bool(v); },
          [access](const ScenarioConfig& c) {
            return std::optional<std::string>(access(c) ? "true"
                                                                                      : "false");
          }};
}

template <class Models>
void add_model_fields(std::vector<Field>& fields, const std::string& prefix, Models models) {
  const std::string dl = prefix + ".dl";
  fields.push_back(real(dl, "intercept", [models](auto& c) -> auto& {
    return models(c).dl.intercept;
  }));
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) {
    fields.push_back(real(dl, std::string(kDlFeatureNames[j]),
                          [models, j](auto& c) -> auto& {
                            return models(c).dl.coef[j];
                          }));
  }
  const std::string idt = prefix + ".idt";
  fields.push_back(
      real(idt, "k_up", [models](auto& c) -> auto& { return models(c).idt.k_up; }));
  fields.push_back(real(idt, "k_down", [models](auto& c) -> auto& {
    return models(c).idt.k_down;
  }));
  const std::string ami = prefix + ".ami";
  fields.push_back(real(ami, "theta0", [models](auto& c) -> auto& {
    return models(c).ami.theta0;
  }));
  fields.push_back(real(ami, "theta_prev", [models](auto& c) -> auto& {
    return models(c).ami.theta_prev;
  }));
  fields.push_back(real(ami, "theta_set", [models](auto& c) -> auto& {
    return models(c).ami.theta_set;
  }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer<std::size_t>("scenario", "steps",
                                     [](auto& c) -> auto& { return c.steps; }));
    f.push_back(integer<std::uint64_t>(
        "scenario", "seed", [](auto& c) -> auto& { return c.seed; }));
    f.push_back(boolean("scenario", "model_mismatch",
                        [](auto& c) -> auto& { return c.model_mismatch; }));
    f.push_back(boolean("scenario", "excitation",
                        [](auto& c) -> auto& { return c.excitation; }));
    f.push_back({"scenario", "initial_temp",
                 [](ScenarioConfig& c, std::string_view v) { c.initial_temp = to_real(v); },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   if (!c.initial_temp) return std::nullopt;
                   return fmt17(*c.initial_temp);
                 }});
    f.push_back({"scenario", "initial_illum",
                 [](ScenarioConfig& c, std::string_view v) { c.initial_illum = to_real(v); },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   if (!c.initial_illum) return std::nullopt;
                   return fmt17(*c.initial_illum);
                 }});
    f.push_back({"scenario", "initial_dl",
                 [](ScenarioConfig& c, std::string_view v) { c.initial_dl = to_list(v); },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   return list_text(c.initial_dl);
                 }});
    f.push_back({"scenario", "lunch_start",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.lunch_start = static_cast<std::size_t>(to_uint(v));
                 },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   if (!c.lunch_start) return std::nullopt;
                   return std::to_string(*c.lunch_start);
                 }});
    f.push_back(integer<std::size_t>(
        "scenario", "lunch_steps", [](auto& c) -> auto& { return c.lunch_steps; }));

    f.push_back({"mpc", "mode",
                 [](ScenarioConfig& c, std::string_view v) {
                   const auto mode = parse_control_mode(trim(v));
                   if (!mode) throw BadValue{"expected NOC, MPC1 or MPC2"};
                   c.mpc.mode = *mode;
                 },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   return std::string(to_string(c.mpc.mode));
                 }});
    f.push_back(integer<std::size_t>(
        "mpc", "num_workers", [](auto& c) -> auto& { return c.mpc.num_workers; }));
    f.push_back(integer<std::size_t>(
        "mpc", "horizon", [](auto& c) -> auto& { return c.mpc.horizon; }));
    f.push_back(real("mpc", "step_hours",
                     [](auto& c) -> auto& { return c.mpc.step_hours; }));
    f.push_back(real("mpc", "temp_lo", [](auto& c) -> auto& { return c.mpc.temp_lo; }));
    f.push_back(real("mpc", "temp_hi", [](auto& c) -> auto& { return c.mpc.temp_hi; }));
    f.push_back(
        real("mpc", "illum_lo", [](auto& c) -> auto& { return c.mpc.illum_lo; }));
    f.push_back(
        real("mpc", "illum_hi", [](auto& c) -> auto& { return c.mpc.illum_hi; }));
    f.push_back(real("mpc", "temp_comfort",
                     [](auto& c) -> auto& { return c.mpc.temp_comfort; }));
    f.push_back(real("mpc", "illum_comfort",
                     [](auto& c) -> auto& { return c.mpc.illum_comfort; }));
    f.push_back(real("mpc", "p_temp", [](auto& c) -> auto& { return c.mpc.p_temp; }));
    f.push_back(real("mpc", "p_illum", [](auto& c) -> auto& { return c.mpc.p_illum; }));
    f.push_back(real("mpc", "penalty_cap",
                     [](auto& c) -> auto& { return c.mpc.penalty_cap; }));

    f.push_back(integer<std::size_t>("de", "population_size", [](auto& c) -> auto& {
      return c.de.population_size;
    }));
    f.push_back(real("de", "mutation_factor",
                     [](auto& c) -> auto& { return c.de.mutation_factor; }));
    f.push_back(real("de", "crossover_rate",
                     [](auto& c) -> auto& { return c.de.crossover_rate; }));
    f.push_back(integer<std::size_t>("de", "max_generations", [](auto& c) -> auto& {
      return c.de.max_generations;
    }));
    f.push_back(real("de", "tolerance", [](auto& c) -> auto& { return c.de.tolerance; }));
    f.push_back(integer<std::uint64_t>(
        "de", "seed", [](auto& c) -> auto& { return c.de.seed; }));

    f.push_back(real("plant", "temp_disturbance_sd",
                     [](auto& c) -> auto& { return c.plant.temp_disturbance_sd; }));
    f.push_back(real("plant", "illum_disturbance_sd",
                     [](auto& c) -> auto& { return c.plant.illum_disturbance_sd; }));
    f.push_back(real("plant", "dl_noise_sd",
                     [](auto& c) -> auto& { return c.plant.dl_noise_sd; }));
    f.push_back(real("plant", "instant_sd",
                     [](auto& c) -> auto& { return c.plant.instant_sd; }));
    f.push_back(integer<std::size_t>(
        "plant", "substeps", [](auto& c) -> auto& { return c.plant.substeps; }));
    f.push_back({"plant", "drift",
                 [](ScenarioConfig& c, std::string_view v) { c.plant.drift = to_list(v); },
                 [](const ScenarioConfig& c) -> std::optional<std::string> {
                   return list_text(c.plant.drift);
                 }});
    f.push_back(real("plant", "ambient_pull",
                     [](auto& c) -> auto& { return c.plant.ambient_pull; }));
    f.push_back(real("plant", "ambient_temp",
                     [](auto& c) -> auto& { return c.plant.ambient_temp; }));

    add_model_fields(f, "plant", [](auto& c) -> auto& { return c.plant.truth; });
    add_model_fields(f, "controller",
                     [](auto& c) -> auto& { return c.controller_models; });
    return f;
  }();
  return table;
}

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& what,
                       std::string field = {}) {
  std::ostringstream msg;
  msg << origin << ':' << line << ": " << what;
  throw Error(ErrorCode::Schema, msg.str(), std::move(field));
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, std::string_view origin) {
  ScenarioConfig config;
  std::set<std::string> known_sections;
  for (const auto& f : fields()) known_sections.insert(f.section);

  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_sections.count(section)) {
        fail(origin, line_no, "unknown section [" + section + "]", section);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(origin, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty()) fail(origin, line_no, "key '" + key + "' outside a section", key);
    const std::string qualified = section + "." + key;

    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.section == section && f.key == key) field = &f;
    }
    if (!field) fail(origin, line_no, "unknown key '" + key + "' in [" + section + "]", qualified);
    if (!seen.insert(qualified).second) {
      fail(origin, line_no, "duplicate key '" + qualified + "'", qualified);
    }
    try {
      field->set(config, value);
    } catch (const BadValue& e) {
      fail(origin, line_no, qualified + ": " + e.what, qualified);
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string emit_config(const ScenarioConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section.rfind("controller", 0) == 0 && !config.model_mismatch) continue;
    const auto value = f.get(config);
    if (!value) continue;
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << *value << '\n';
  }
  return out.str();
}

}  // namespace dmpc::cli
