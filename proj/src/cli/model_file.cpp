#include "dmpc/cli/model_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dmpc::cli {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what, std::string field = {}) {
  throw Error(ErrorCode::Schema, "model file: " + what, std::move(field));
}

const json& object_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) schema(std::string("missing object '") + key + "'", key);
  return j.at(key);
}

double number_at(const json& obj, const std::string& section, const std::string& key) {
  const std::string field = section + "." + key;
  if (!obj.contains(key)) schema("missing '" + field + "'", field);
  const json& v = obj.at(key);
  if (!v.is_number()) schema("'" + field + "' is not a number", field);
  return v.get<double>();
}

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) schema("unknown key '" + section + "." + key + "'", section + "." + key);
  }
}

}  // namespace

std::string emit_models(const ModelSet& models) {
  json dl = json::object();
  dl["intercept"] = models.dl.intercept;
  for (std::size_t j = 0; j < kDlFeatureCount; ++j) {
    dl[std::string(kDlFeatureNames[j])] = models.dl.coef[j];
  }
  json out = {{"format", kModelFormat},
              {"version", kModelVersion},
              {"dl", dl},
              {"idt", {{"k_up", models.idt.k_up}, {"k_down", models.idt.k_down}}},
              {"ami",
               {{"theta0", models.ami.theta0},
                {"theta_prev", models.ami.theta_prev},
                {"theta_set", models.ami.theta_set}}}};
  return out.dump(2) + "\n";
}

ModelSet parse_models(std::string_view text) {
  const json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) schema("not a JSON object");
  reject_unknown(j, "", {"format", "version", "dl", "idt", "ami"});
  if (!j.contains("format") || j.at("format") != kModelFormat) {
    schema("format must be \"" + std::string(kModelFormat) + "\"", "format");
  }
  if (!j.contains("version") || j.at("version") != kModelVersion) {
    schema("unsupported version", "version");
  }

  ModelSet m;
  const json& dl = object_at(j, "dl");
  std::set<std::string> dl_keys{"intercept"};
  for (auto name : kDlFeatureNames) dl_keys.emplace(name);
  reject_unknown(dl, "dl", dl_keys);
  m.dl.intercept = number_at(dl, "dl", "intercept");
  for (std::size_t k = 0; k < kDlFeatureCount; ++k) {
    m.dl.coef[k] = number_at(dl, "dl", std::string(kDlFeatureNames[k]));
  }

  const json& idt = object_at(j, "idt");
  reject_unknown(idt, "idt", {"k_up", "k_down"});
  m.idt.k_up = number_at(idt, "idt", "k_up");
  m.idt.k_down = number_at(idt, "idt", "k_down");

  const json& ami = object_at(j, "ami");
  reject_unknown(ami, "ami", {"theta0", "theta_prev", "theta_set"});
  m.ami.theta0 = number_at(ami, "ami", "theta0");
  m.ami.theta_prev = number_at(ami, "ami", "theta_prev");
  m.ami.theta_set = number_at(ami, "ami", "theta_set");

  m.validate();
  return m;
}

ModelSet load_models(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open model file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_models(text.str());
}

void save_models(const std::filesystem::path& path, const ModelSet& models) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Schema, "cannot write model file " + path.string());
  out << emit_models(models);
}

}  // namespace dmpc::cli
