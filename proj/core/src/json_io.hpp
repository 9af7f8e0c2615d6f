#pragma once

#include <json.hpp>

#include "ldh/networks.hpp"

namespace ldh::detail {

using json = nlohmann::json;

inline json to_json(const NetworkConfig& c)
{
    return json{{"omega", c.omega},
                {"nhf", c.nhf},
                {"hiding_width", c.hiding_width},
                {"locating_width", c.locating_width},
                {"image_side", c.image_side},
                {"unet_levels", c.unet_levels}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
template <class T>
void read_field(const json& j, const char* key, T& out)
{
    if (const auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config field '") + key + "': " + e.what());
        }
    }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where)
{
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            ok = ok || key == k;
        }
        if (!ok) {
            throw ConfigError("unknown field '" + key + "' in " + where);
        }
    }
}

inline NetworkConfig network_from_json(const json& j)
{
    reject_unknown(j,
                   {"omega", "nhf", "hiding_width", "locating_width", "image_side", "unet_levels"},
                   "network config");
    NetworkConfig c;
    read_field(j, "omega", c.omega);
    read_field(j, "nhf", c.nhf);
    read_field(j, "hiding_width", c.hiding_width);
    read_field(j, "locating_width", c.locating_width);
    read_field(j, "image_side", c.image_side);
    read_field(j, "unet_levels", c.unet_levels);
    return c;
}

} // namespace ldh::detail
