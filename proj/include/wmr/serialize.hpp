#pragma once

#include "wmr/scene.hpp"

#include <json.hpp>

#include <filesystem>

namespace wmr {

using Json = nlohmann::json;

// nlohmann ADL hooks. Readers accept missing keys and keep the defaults.
void to_json(Json& j, const GridLayout& v);
void from_json(const Json& j, GridLayout& v);
void to_json(Json& j, const TextureSpec& v);
void from_json(const Json& j, TextureSpec& v);
void to_json(Json& j, const LightSource& v);
void from_json(const Json& j, LightSource& v);
void to_json(Json& j, const SceneConfig& v);
void from_json(const Json& j, SceneConfig& v);
void to_json(Json& j, const SceneTemplate& v);
void from_json(const Json& j, SceneTemplate& v);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace wmr
