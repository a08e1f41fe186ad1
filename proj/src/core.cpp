#include "sapphire/core.hpp"

#include <cctype>

namespace sapphire {

const std::array<ConstructKind, kConstructCount>& all_constructs() {
    static const std::array<ConstructKind, kConstructCount> kOrder = {
        ConstructKind::StateChange, ConstructKind::Action,     ConstructKind::Part,
        ConstructKind::Phenomenon,  ConstructKind::Input,      ConstructKind::Organ,
        ConstructKind::Effect,
    };
    return kOrder;
}

std::string_view construct_name(ConstructKind kind) {
    switch (kind) {
        case ConstructKind::StateChange: return "StateChange";
        case ConstructKind::Action: return "Action";
        case ConstructKind::Part: return "Part";
        case ConstructKind::Phenomenon: return "Phenomenon";
        case ConstructKind::Input: return "Input";
        case ConstructKind::Organ: return "Organ";
        case ConstructKind::Effect: return "Effect";
    }
    return "Unknown";
}

std::string_view construct_display_name(ConstructKind kind) {
    switch (kind) {
        case ConstructKind::StateChange: return "State changes";
        case ConstructKind::Action: return "Actions";
        case ConstructKind::Part: return "Parts";
        case ConstructKind::Phenomenon: return "physical Phenomena";
        case ConstructKind::Input: return "Inputs";
        case ConstructKind::Organ: return "oRgans";
        case ConstructKind::Effect: return "physical Effects";
    }
    return "Unknown";
}

std::string_view construct_answer_key(ConstructKind kind) {
    switch (kind) {
        case ConstructKind::StateChange: return "StateChanges";
        case ConstructKind::Action: return "Actions";
        case ConstructKind::Part: return "Parts";
        case ConstructKind::Phenomenon: return "Phenomena";
        case ConstructKind::Input: return "Inputs";
        case ConstructKind::Organ: return "Organs";
        case ConstructKind::Effect: return "Effects";
    }
    return "Unknown";
}

ConstructKind parse_construct_name(std::string_view name) {
    for (ConstructKind kind : all_constructs()) {
        if (construct_name(kind) == name) return kind;
    }
    throw Error(ErrorCode::ParseError, "unknown construct kind '" + std::string(name) + "'");
}

SystemName SystemName::parse(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    if (begin == end) {
        throw Error(ErrorCode::EmptyName, "system name is empty");
    }
    return SystemName(std::string(raw.substr(begin, end - begin)));
}

std::array<ConstructQuery, kConstructCount> queries_for_all_constructs() {
    return {{
        {ConstructKind::StateChange,
         "What state changes occur in the system during its operation? Mention the "
         "initial and final states of the properties involved."},
        {ConstructKind::Action,
         "What are the Actions or overall purpose served by the system?"},
        {ConstructKind::Part,
         "What are the physical components and interfaces that constitute the system "
         "and its environment.?"},
        {ConstructKind::Phenomenon,
         "What physical phenomena occur during the operation of the system?"},
        {ConstructKind::Input,
         "What inputs are necessary for the system to operate?"},
        {ConstructKind::Organ,
         "What are the properties and conditions that remain constant during the "
         "interaction between the system and its environment and are necessary for "
         "activating the operation of the system?"},
        {ConstructKind::Effect,
         "What are the scientific laws, principles, or theories that govern the "
         "system’s operation?"},
    }};
}

ConstructQuery query_for(ConstructKind kind) {
    return queries_for_all_constructs()[static_cast<std::size_t>(kind)];
}

namespace {

void validate_answers(const ConstructMap<std::string>& answers) {
    for (ConstructKind kind : all_constructs()) {
        if (answers[kind].empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "missing answer for construct '" +
                            std::string(construct_name(kind)) + "'");
        }
    }
}

}  // namespace

void SapphireModel::validate() const { validate_answers(answers); }

nlohmann::ordered_json SapphireModel::to_json() const {
    nlohmann::ordered_json constructs = nlohmann::ordered_json::array();
    for (ConstructKind kind : all_constructs()) {
        constructs.push_back({{"kind", construct_name(kind)}, {"answer", answers[kind]}});
    }
    return {{"system", system.str()}, {"constructs", std::move(constructs)}};
}

SapphireModel SapphireModel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("system") || !j.contains("constructs")) {
        throw Error(ErrorCode::ParseError, "model JSON must have 'system' and 'constructs'");
    }
    SapphireModel model{SystemName::parse(j.at("system").get<std::string>()), {}};
    for (const auto& entry : j.at("constructs")) {
        ConstructKind kind = parse_construct_name(entry.at("kind").get<std::string>());
        model.answers[kind] = entry.at("answer").get<std::string>();
    }
    model.validate();
    return model;
}

void HypotheticalModel::validate() const { validate_answers(answers); }

}  // namespace sapphire
