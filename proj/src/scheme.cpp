#include "slsi/scheme.hpp"

#include <json.hpp>

namespace slsi {

std::string SchemeConfig::to_json_string() const {
  nlohmann::json j;
  j["master_seed"] = master_seed;
  j["family"] = to_string(kind.family);
  j["style"] = to_string(kind.style);
  j["k"] = k;
  j["l"] = l;
  j["p"] = modulus;
  return j.dump();
}

SchemeConfig SchemeConfig::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SchemeConfig cfg;
  cfg.master_seed = j.at("master_seed").get<uint64_t>();
  cfg.kind.family = family_from_string(j.at("family").get<std::string>());
  if (j.contains("style"))
    cfg.kind.style = style_from_string(j.at("style").get<std::string>());
  cfg.k = j.at("k").get<int>();
  cfg.l = j.at("l").get<int>();
  if (j.contains("p")) cfg.modulus = j.at("p").get<uint64_t>();
  cfg.validate();
  return cfg;
}

}  // namespace slsi
