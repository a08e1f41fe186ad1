#pragma once

/// @file core.hpp
/// @brief Domain types for the SAPPhIRE causal ontology.
///
/// SAPPhIRE describes how a system achieves its function through seven
/// constructs: State changes, Actions, Parts, physical Phenomena, Inputs,
/// oRgans, and physical Effects. Everything downstream (retrieval queries,
/// generated models, evaluation records) is keyed by these constructs, in
/// that canonical order.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sapphire/errors.hpp"

namespace sapphire {

inline constexpr std::size_t kConstructCount = 7;

/// Canonical order: S, A, P, Ph, I, R, E.
enum class ConstructKind {
    StateChange = 0,
    Action,
    Part,
    Phenomenon,
    Input,
    Organ,
    Effect,
};

const std::array<ConstructKind, kConstructCount>& all_constructs();

/// Stable identifier used in JSON ("StateChange", "Action", ...).
std::string_view construct_name(ConstructKind kind);

/// Human-facing name used in prompts and Markdown ("State changes", "oRgans", ...).
std::string_view construct_display_name(ConstructKind kind);

/// Key used in the hypothetical-model JSON contract ("StateChanges", "Organs", ...).
std::string_view construct_answer_key(ConstructKind kind);

ConstructKind parse_construct_name(std::string_view name);

/// Fixed-size map keyed by construct, iterated in canonical order.
template <typename T>
class ConstructMap {
public:
    T& operator[](ConstructKind kind) { return items_[index(kind)]; }
    const T& operator[](ConstructKind kind) const { return items_[index(kind)]; }

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    bool operator==(const ConstructMap&) const = default;

private:
    static std::size_t index(ConstructKind kind) { return static_cast<std::size_t>(kind); }
    std::array<T, kConstructCount> items_{};
};

/// The user's input system, e.g. "solenoid valve". Non-empty after trimming.
class SystemName {
public:
    /// Trims surrounding whitespace; throws EmptyName if nothing remains.
    static SystemName parse(std::string_view raw);

    const std::string& str() const noexcept { return value_; }

    bool operator==(const SystemName&) const = default;

private:
    explicit SystemName(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

/// One retrieval query per construct; the texts are fixed and byte-stable
/// (including the stray ".?" ending the Parts query, kept for fidelity with
/// the published query set).
struct ConstructQuery {
    ConstructKind kind;
    std::string text;
};

/// All seven queries in canonical order.
std::array<ConstructQuery, kConstructCount> queries_for_all_constructs();

ConstructQuery query_for(ConstructKind kind);

/// Final grounded model: one answer per construct, all non-empty.
struct SapphireModel {
    SystemName system;
    ConstructMap<std::string> answers;

    /// Throws InvalidArgument if any answer is empty.
    void validate() const;

    /// Shape: { "system": ..., "constructs": [ { "kind", "answer" }, ... ] }
    /// with constructs in canonical order.
    nlohmann::ordered_json to_json() const;
    static SapphireModel from_json(const nlohmann::json& j);
};

/// First-pass model generated without retrieval; same shape as SapphireModel
/// but the content is presumed, not grounded.
struct HypotheticalModel {
    SystemName system;
    ConstructMap<std::string> answers;

    void validate() const;

    bool operator==(const HypotheticalModel&) const = default;
};

}  // namespace sapphire
