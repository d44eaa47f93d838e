#include "cspda/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cspda {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "cmdp-model-v1";

}  // namespace

std::string model_to_json(const CmdpModel& model) {
    model.validate();
    Json j;
    j["format"] = kFormatTag;
    j["num_states"] = model.num_states;
    j["num_actions"] = model.num_actions;
    j["num_constraints"] = model.num_constraints;
    j["discount"] = model.discount;
    j["g_max"] = model.g_max;
    j["initial_dist"] = model.initial_dist;

    Json reward = Json::array();
    for (int s = 0; s < model.num_states; ++s) {
        Json row = Json::array();
        for (int a = 0; a < model.num_actions; ++a) row.push_back(model.r(s, a));
        reward.push_back(std::move(row));
    }
    j["reward"] = std::move(reward);

    Json costs = Json::array();
    for (int i = 0; i < model.num_constraints; ++i) {
        Json table = Json::array();
        for (int s = 0; s < model.num_states; ++s) {
            Json row = Json::array();
            for (int a = 0; a < model.num_actions; ++a) row.push_back(model.g(i, s, a));
            table.push_back(std::move(row));
        }
        costs.push_back(std::move(table));
    }
    j["constraint_costs"] = std::move(costs);

    Json trans = Json::array();
    for (int a = 0; a < model.num_actions; ++a) {
        Json mat = Json::array();
        for (int s = 0; s < model.num_states; ++s) {
            Json row = Json::array();
            for (int s2 = 0; s2 < model.num_states; ++s2) row.push_back(model.p(a, s, s2));
            mat.push_back(std::move(row));
        }
        trans.push_back(std::move(mat));
    }
    j["transition"] = std::move(trans);

    return j.dump(2) + "\n";
}

CmdpModel model_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != kFormatTag)
        throw std::invalid_argument("model file missing format tag '" +
                                    std::string(kFormatTag) + "'");

    CmdpModel m;
    try {
        m.num_states = j.at("num_states").get<int>();
        m.num_actions = j.at("num_actions").get<int>();
        m.num_constraints = j.at("num_constraints").get<int>();
        m.discount = j.at("discount").get<double>();
        m.g_max = j.at("g_max").get<double>();
        m.initial_dist = j.at("initial_dist").get<std::vector<double>>();

        const auto& reward = j.at("reward");
        if (static_cast<int>(reward.size()) != m.num_states)
            throw std::invalid_argument("reward must have num_states rows");
        m.reward.reserve(static_cast<std::size_t>(m.num_states) * m.num_actions);
        for (const auto& row : reward) {
            if (static_cast<int>(row.size()) != m.num_actions)
                throw std::invalid_argument("reward rows must have num_actions entries");
            for (const auto& v : row) m.reward.push_back(v.get<double>());
        }

        const auto& costs = j.at("constraint_costs");
        if (static_cast<int>(costs.size()) != m.num_constraints)
            throw std::invalid_argument("constraint_costs must have num_constraints tables");
        for (const auto& table : costs) {
            if (static_cast<int>(table.size()) != m.num_states)
                throw std::invalid_argument("constraint cost tables must have num_states rows");
            std::vector<double> flat;
            flat.reserve(static_cast<std::size_t>(m.num_states) * m.num_actions);
            for (const auto& row : table) {
                if (static_cast<int>(row.size()) != m.num_actions)
                    throw std::invalid_argument(
                        "constraint cost rows must have num_actions entries");
                for (const auto& v : row) flat.push_back(v.get<double>());
            }
            m.constraint_costs.push_back(std::move(flat));
        }

        const auto& trans = j.at("transition");
        if (static_cast<int>(trans.size()) != m.num_actions)
            throw std::invalid_argument("transition must have num_actions matrices");
        m.transition.reserve(static_cast<std::size_t>(m.num_actions) * m.num_states *
                             m.num_states);
        for (const auto& mat : trans) {
            if (static_cast<int>(mat.size()) != m.num_states)
                throw std::invalid_argument("transition matrices must have num_states rows");
            for (const auto& row : mat) {
                if (static_cast<int>(row.size()) != m.num_states)
                    throw std::invalid_argument("transition rows must have num_states entries");
                for (const auto& v : row) m.transition.push_back(v.get<double>());
            }
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed model file: ") + e.what());
    }

    m.validate();
    return m;
}

void save_model(const CmdpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << model_to_json(model);
}

CmdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace cspda
