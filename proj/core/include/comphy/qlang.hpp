#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comphy {

enum class Opcode {
    // sources
    Objects,
    Events,
    UnseenEvents,
    // object filters
    FilterColor,
    FilterShape,
    FilterMaterial,
    FilterMass,
    FilterCharged,
    FilterUncharged,
    FilterSame,
    FilterOpposite,
    FilterMoving,
    FilterStationary,
    // event filters
    FilterCollision,
    FilterIn,
    FilterOut,
    // selectors
    Unique,
    Count,
    Exist,
    Negate,
    // queries
    QueryColor,
    QueryShape,
    QueryMaterial,
    QueryMass,
    QueryCharged,
    QueryChargeRelation,
    // counterfactual sources
    CounterfactHeavier,
    CounterfactLighter,
    CounterfactUncharged,
    CounterfactOpposite,
};

std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view name);

/// One step of a program. `branch` is a nested object-producing program used
/// by pairwise operations (filter_same/opposite, query_charge_relation) and
/// by the object restriction of event filters.
struct Op {
    Opcode code = Opcode::Objects;
    std::vector<std::string> args;
    std::vector<Op> branch;
    bool operator==(const Op&) const = default;
};

using Program = std::vector<Op>;

enum class Sort { None, ObjectSet, EventSet, Object, Integer, Boolean, Token };
std::string_view to_string(Sort s);

/// Output sort of `program` when fed `input`. A program starting from scratch
/// uses Sort::None and must open with a source; a multiple-choice option
/// program continues from Sort::EventSet. Throws TypeMismatch naming the op
/// index.
Sort typecheck(const Program& program, Sort input = Sort::None);
bool well_typed(const Program& program, Sort input = Sort::None);

/// Text -> program over the question grammar. Question texts start from
/// Sort::None; option texts ("The red cube collides with the sphere.") yield
/// an EventSet continuation. Throws Unparseable with the character offset.
Program parse(std::string_view text);

/// Program -> canonical text; parse(render(p)) == p. Throws TypeMismatch
/// for ill-typed programs and Unparseable for programs without surface form.
std::string render(const Program& program);

/// Concatenation used to run an option under its question's context.
Program append(const Program& head, const Program& tail);

}  // namespace comphy
