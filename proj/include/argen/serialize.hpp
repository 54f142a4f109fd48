#pragma once

#include <string>

#include <json.hpp>

#include "argen/core.hpp"

namespace argen {

using json = nlohmann::json;

void to_json(json& j, const TaskItem& item);
// Validates the record shape only; callers run validate_item afterwards.
void from_json(const json& j, TaskItem& item);

void to_json(json& j, const CallRecord& call);
void from_json(const json& j, CallRecord& call);

void to_json(json& j, const Transcript& transcript);
void from_json(const json& j, Transcript& transcript);

// Compact single-line dump that never throws on invalid UTF-8.
std::string dump_line(const json& j);

}  // namespace argen
