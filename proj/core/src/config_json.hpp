#pragma once

#include <string>

#include <json.hpp>

#include "cotkit/errors.hpp"
#include "cotkit/transfer_config.hpp"

namespace cotkit::detail {

inline nlohmann::json config_to_json(const TransferConfig& c) {
    return nlohmann::json{{"thinking", c.thinking},
                          {"answering", c.answering},
                          {"budget", c.budget},
                          {"strategy", std::string(to_string(c.strategy))}};
}

inline TransferConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config is not a JSON object");
    TransferConfig c;
    try {
        c.thinking = j.at("thinking").get<std::string>();
        c.answering = j.at("answering").get<std::string>();
        c.budget = j.at("budget").get<std::size_t>();
        c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    if (c.budget == 0) throw ValidationError("config budget must be positive");
    return c;
}

}  // namespace cotkit::detail
