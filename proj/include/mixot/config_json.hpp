#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "mixot/kernels.hpp"
#include "mixot/measure.hpp"

// JSON encodings of the config building blocks, shared by the experiment
// round-trip and the CLI config formats.  Field names mirror the structs.

namespace mixot {

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

nlohmann::json kernel_to_json(const KernelModel& k);
KernelModel kernel_from_json(const nlohmann::json& j);

nlohmann::json measure_to_json(const MixingMeasure& g);
MixingMeasure measure_from_json(const nlohmann::json& j);

// Throws InvalidArgument naming the first field of `j` not in `allowed`;
// typos in config files should fail loudly, not silently default.
void reject_unknown_fields(const nlohmann::json& j,
                           std::initializer_list<const char*> allowed,
                           const std::string& where);

}  // namespace mixot
