#pragma once

#include <string>

#include <json.hpp>

#include "watermark.hpp"

namespace sfw {

// Canonical key document: fixed field set in fixed order, every kind uses
// the same schema. Ring values and noise patterns are not stored; they are
// rebuilt from the seed on load, so the document stays small and the seed
// stays the single source of truth.
inline std::string key_to_json(const WatermarkKey& key) {
  nlohmann::ordered_json j;
  j["mask_version"] = key.mask_version;
  j["kind"] = kind_name(key.kind);
  j["channel"] = key.channel;
  j["seed"] = key.seed;
  j["center_aware"] = key.region == EmbedRegion::center_aware;
  j["frame_rows"] = key.frame_rows;
  j["frame_cols"] = key.frame_cols;
  j["radius"] = key.radius;
  j["lambda"] = key.lambda;
  j["cell_px"] = key.cell_px;
  j["qr_mask_id"] = key.qr_mask_id;
  j["payload"] = key.payload.to_hex();
  return j.dump(2) + "\n";
}

inline WatermarkKey key_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("key json: parse failure: ") + e.what());
  }
  try {
    std::string version = j.at("mask_version").get<std::string>();
    if (version != "sfw-mask-v1")
      throw std::invalid_argument("key json: unsupported mask_version " + version);

    KeySpec spec;
    spec.kind = kind_from_name(j.at("kind").get<std::string>());
    spec.channel = j.at("channel").get<int>();
    spec.region = j.at("center_aware").get<bool>() ? EmbedRegion::center_aware : EmbedRegion::full_frame;
    spec.frame_rows = j.at("frame_rows").get<int>();
    spec.frame_cols = j.at("frame_cols").get<int>();
    spec.radius = j.at("radius").get<int>();
    spec.lambda = j.at("lambda").get<double>();
    spec.cell_px = j.at("cell_px").get<int>();
    spec.qr_mask_id = j.at("qr_mask_id").get<int>();
    if (spec.kind == WatermarkKind::hsqr)
      spec.payload = Payload72::from_hex(j.at("payload").get<std::string>());
    return make_key(spec, j.at("seed").get<uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("key json: bad document: ") + e.what());
  }
}

}  // namespace sfw
