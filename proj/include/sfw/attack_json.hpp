#pragma once

#include <string>

#include <json.hpp>

#include "channel.hpp"

namespace sfw {

// Fixed wire format: {"kind": <name>, <parameter keys for that kind>}.
// Parameter keys are part of the interface: brightness/contrast use
// "factor", jpeg "quality", blur "radius", noise "sigma", crops "scale"
// (crop_random also "seed"), regen "t_star" and "steps_total".
inline nlohmann::ordered_json attack_to_json(const AttackSpec& spec) {
  validate_attack(spec);
  nlohmann::ordered_json j;
  j["kind"] = attack_kind_name(spec.kind);
  switch (spec.kind) {
    case AttackKind::identity: break;
    case AttackKind::brightness:
    case AttackKind::contrast: j["factor"] = spec.factor; break;
    case AttackKind::jpeg: j["quality"] = spec.quality; break;
    case AttackKind::blur: j["radius"] = spec.radius; break;
    case AttackKind::noise: j["sigma"] = spec.sigma; break;
    case AttackKind::crop_center: j["scale"] = spec.scale; break;
    case AttackKind::crop_random:
      j["scale"] = spec.scale;
      j["seed"] = spec.seed;
      break;
    case AttackKind::regen:
      j["t_star"] = spec.t_star;
      j["steps_total"] = spec.steps_total;
      break;
  }
  return j;
}

inline AttackSpec attack_from_json(const nlohmann::json& j) {
  AttackSpec spec;
  try {
    spec.kind = attack_kind_from_name(j.at("kind").get<std::string>());
    switch (spec.kind) {
      case AttackKind::identity: break;
      case AttackKind::brightness:
      case AttackKind::contrast: spec.factor = j.at("factor").get<double>(); break;
      case AttackKind::jpeg: spec.quality = j.at("quality").get<int>(); break;
      case AttackKind::blur: spec.radius = j.at("radius").get<int>(); break;
      case AttackKind::noise: spec.sigma = j.at("sigma").get<double>(); break;
      case AttackKind::crop_center: spec.scale = j.at("scale").get<double>(); break;
      case AttackKind::crop_random:
        spec.scale = j.at("scale").get<double>();
        spec.seed = j.value("seed", uint64_t{0});
        break;
      case AttackKind::regen:
        spec.t_star = j.at("t_star").get<int>();
        spec.steps_total = j.value("steps_total", 1000);
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("attack json: bad document: ") + e.what());
  }
  validate_attack(spec);
  return spec;
}

inline AttackSpec attack_from_json_text(const std::string& text) {
  try {
    return attack_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("attack json: parse failure: ") + e.what());
  }
}

}  // namespace sfw
