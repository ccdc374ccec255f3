#pragma once

// nlohmann/json conversions for configuration and sidecar types.

#include <json.hpp>

#include "mdhar/radar_params.hpp"
#include "mdhar/scene_synth.hpp"
#include "mdhar/segment.hpp"
#include "mdhar/nnet/train.hpp"

namespace mdhar {

using Json = nlohmann::json;

Json to_json(const RadarParams& p);
/// Missing keys keep `base` values; a missing element spacing means lambda/2.
RadarParams radar_from_json(const Json& j, RadarParams base = {});

Json to_json(const MotionStyle& s);
MotionStyle style_from_json(const Json& j);

Json to_json(const PersonMotion& p);
PersonMotion person_from_json(const Json& j);

Json to_json(const TriggerConfig& t);
TriggerConfig trigger_from_json(const Json& j, TriggerConfig base = {});

Json to_json(const nnet::TrainConfig& t);
nnet::TrainConfig train_from_json(const Json& j, nnet::TrainConfig base = {});

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace mdhar
