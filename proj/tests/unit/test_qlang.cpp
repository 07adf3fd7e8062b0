#include "generators.hpp"

#include <comphy/error.hpp>
#include <comphy/qlang.hpp>

#include <doctest.h>

#include <array>
#include <string>

using namespace comphy;

namespace {

Op op(Opcode code, std::vector<std::string> args = {}, Program branch = {}) {
    return Op{code, std::move(args), std::move(branch)};
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Data;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

constexpr std::array kColors{"gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"};
constexpr std::array kShapes{"cube", "sphere", "cylinder"};
constexpr std::array kMaterials{"metal", "rubber"};

// Filters in surface order: properties, then color/material, then shape.
Program descriptor_filters(gen::Source& src) {
    Program out;
    const int n_props = src.integer(0, 2);
    for (int i = 0; i < n_props; ++i) {
        switch (src.integer(0, 4)) {
            case 0: out.push_back(op(Opcode::FilterMass, {src.coin() ? "heavy" : "light"})); break;
            case 1: out.push_back(op(Opcode::FilterCharged)); break;
            case 2: out.push_back(op(Opcode::FilterUncharged)); break;
            case 3: out.push_back(op(Opcode::FilterMoving)); break;
            default: out.push_back(op(Opcode::FilterStationary)); break;
        }
    }
    Program attrs;
    if (src.coin()) attrs.push_back(op(Opcode::FilterColor, {src.pick(kColors)}));
    if (src.coin()) attrs.push_back(op(Opcode::FilterMaterial, {src.pick(kMaterials)}));
    if (attrs.size() == 2 && src.coin()) std::swap(attrs[0], attrs[1]);
    out.insert(out.end(), attrs.begin(), attrs.end());
    if (src.coin()) out.push_back(op(Opcode::FilterShape, {src.pick(kShapes)}));
    return out;
}

Program object_set(gen::Source& src) {
    Program p{op(Opcode::Objects)};
    const Program f = descriptor_filters(src);
    p.insert(p.end(), f.begin(), f.end());
    return p;
}

Program object_ref(gen::Source& src) {
    Program p = object_set(src);
    p.push_back(op(Opcode::Unique));
    return p;
}

Program random_question(gen::Source& src) {
    switch (src.integer(0, 12)) {
        case 0: {
            Program p = object_ref(src);
            p.push_back(op(src.pick(std::array{Opcode::QueryColor, Opcode::QueryShape, Opcode::QueryMaterial})));
            return p;
        }
        case 1: {
            Program p = object_ref(src);
            p.push_back(op(Opcode::QueryMass));
            return p;
        }
        case 2: {
            Program p = object_ref(src);
            p.push_back(op(Opcode::QueryCharged));
            return p;
        }
        case 3: {
            Program p = object_ref(src);
            p.push_back(op(Opcode::QueryChargeRelation, {src.coin() ? "opposite" : "same"}, object_ref(src)));
            return p;
        }
        case 4: {
            Program p = object_ref(src);
            p.push_back(op(src.pick(std::array{Opcode::CounterfactHeavier, Opcode::CounterfactLighter,
                                               Opcode::CounterfactUncharged, Opcode::CounterfactOpposite})));
            return p;
        }
        case 5: {
            Program p = object_set(src);
            p.push_back(op(Opcode::Count));
            return p;
        }
        case 6: {
            Program p = object_set(src);
            p.push_back(op(src.coin() ? Opcode::FilterSame : Opcode::FilterOpposite, {}, object_ref(src)));
            p.push_back(op(Opcode::Count));
            return p;
        }
        case 7: {
            Program p = object_set(src);
            p.push_back(op(Opcode::Exist));
            return p;
        }
        case 8: {
            Program p = object_set(src);
            p.push_back(op(Opcode::Exist));
            p.push_back(op(Opcode::Negate));
            return p;
        }
        case 9:
            return {op(Opcode::Events), op(Opcode::FilterCollision, {}, object_ref(src)),
                    op(Opcode::FilterCollision, {}, object_ref(src)), op(Opcode::Exist)};
        case 10:
            return {op(Opcode::Events), op(src.coin() ? Opcode::FilterIn : Opcode::FilterOut, {}, object_ref(src)),
                    op(Opcode::Exist)};
        case 11: return {op(Opcode::UnseenEvents)};
        default:
            return {op(Opcode::FilterCollision, {}, object_ref(src)), op(Opcode::FilterCollision, {}, object_ref(src)),
                    op(Opcode::Exist)};
    }
}

}  // namespace

TEST_CASE("parse of a charge query") {
    const Program p = parse("Is the red sphere charged?");
    const Program expected{op(Opcode::Objects), op(Opcode::FilterColor, {"red"}), op(Opcode::FilterShape, {"sphere"}),
                           op(Opcode::Unique), op(Opcode::QueryCharged)};
    CHECK(p == expected);
    CHECK(typecheck(p) == Sort::Boolean);
    CHECK(render(p) == "Is the red sphere charged?");
}

TEST_CASE("parse is case and spacing tolerant") {
    CHECK(parse("is the red sphere charged ?") == parse("Is the red sphere charged?"));
}

TEST_CASE("unparseable text reports the offset") {
    CHECK(kind_of([] { parse("blargh?"); }) == ErrorKind::Unparseable);
    CHECK(message_of([] { parse("blargh?"); }).find("offset 0") != std::string::npos);
    const std::string msg = message_of([] { parse("Is the red sphere glowing?"); });
    CHECK(msg.find("offset 18") != std::string::npos);
}

TEST_CASE("typecheck") {
    CHECK(typecheck({op(Opcode::Objects), op(Opcode::Count)}) == Sort::Integer);
    CHECK(well_typed({op(Opcode::Objects), op(Opcode::Count)}));

    const Program bad{op(Opcode::Events), op(Opcode::FilterColor, {"red"})};
    CHECK_FALSE(well_typed(bad));
    CHECK(kind_of([&] { typecheck(bad); }) == ErrorKind::TypeMismatch);
    CHECK(message_of([&] { typecheck(bad); }).find("op 1") != std::string::npos);

    const Program cf{op(Opcode::Objects), op(Opcode::FilterColor, {"red"}), op(Opcode::Unique),
                     op(Opcode::CounterfactUncharged), op(Opcode::UnseenEvents)};
    CHECK_FALSE(well_typed(cf));

    CHECK_FALSE(well_typed({}));
    CHECK_FALSE(well_typed({op(Opcode::Objects), op(Opcode::FilterColor, {"mauve"})}));
    CHECK_FALSE(well_typed({op(Opcode::Objects), op(Opcode::FilterSame), op(Opcode::Count)}));
    CHECK(typecheck({op(Opcode::FilterCollision, {}, {op(Opcode::Objects), op(Opcode::Unique)}), op(Opcode::Exist)},
                    Sort::EventSet) == Sort::Boolean);
}

TEST_CASE("opcode names round trip") {
    for (int i = 0; i <= static_cast<int>(Opcode::CounterfactOpposite); ++i) {
        const auto code = static_cast<Opcode>(i);
        CHECK(parse_opcode(to_string(code)) == code);
    }
    CHECK_FALSE(parse_opcode("filter_smell").has_value());
}

TEST_CASE("question shapes") {
    CHECK(parse("Are there no heavy objects?") ==
          Program{op(Opcode::Objects), op(Opcode::FilterMass, {"heavy"}), op(Opcode::Exist), op(Opcode::Negate)});
    CHECK(parse("What will happen next?") == Program{op(Opcode::UnseenEvents)});

    const Program brown{op(Opcode::Objects), op(Opcode::FilterColor, {"brown"}), op(Opcode::Unique)};
    CHECK(parse("How many cubes carry the opposite charge to the brown object?") ==
          Program{op(Opcode::Objects), op(Opcode::FilterShape, {"cube"}), op(Opcode::FilterOpposite, {}, brown),
                  op(Opcode::Count)});
    CHECK(parse("What would happen if the brown object were oppositely charged?") ==
          append(brown, {op(Opcode::CounterfactOpposite)}));
}

TEST_CASE("option text parses to an event-set continuation") {
    const Program p = parse("The red cube collides with the sphere.");
    REQUIRE(p.size() == 3);
    CHECK(p[0].code == Opcode::FilterCollision);
    CHECK(p[2].code == Opcode::Exist);
    CHECK(typecheck(p, Sort::EventSet) == Sort::Boolean);
    CHECK(render(p) == "The red cube collides with the sphere.");

    const Program head = parse("What would happen if the red cube were heavier?");
    CHECK(typecheck(append(head, p)) == Sort::Boolean);
}

TEST_CASE("programs without a surface form") {
    CHECK(kind_of([] { render({op(Opcode::Objects), op(Opcode::FilterShape, {"cube"}),
                               op(Opcode::FilterColor, {"red"}), op(Opcode::Count)}); }) == ErrorKind::Unparseable);
    CHECK(kind_of([] { render({op(Opcode::Events), op(Opcode::Count)}); }) == ErrorKind::Unparseable);
    CHECK(kind_of([] { render({op(Opcode::Events), op(Opcode::FilterColor, {"red"})}); }) ==
          ErrorKind::TypeMismatch);
}

TEST_CASE("property: parse inverts render on generated programs") {
    gen::Source src(20261016);
    for (int trial = 0; trial < 3000; ++trial) {
        const Program p = random_question(src);
        const Sort input = p.front().code == Opcode::FilterCollision ? Sort::EventSet : Sort::None;
        REQUIRE(well_typed(p, input));
        const std::string text = render(p);
        INFO(text);
        CHECK(parse(text) == p);
    }
}
