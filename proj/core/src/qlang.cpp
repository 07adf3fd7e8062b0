#include "comphy/qlang.hpp"

#include <array>
#include <cctype>
#include <string>

#include "comphy/attributes.hpp"
#include "comphy/error.hpp"
#include "comphy/property_graph.hpp"

namespace comphy {

namespace {

struct OpInfo {
    Opcode code;
    std::string_view name;
};

constexpr std::array kOpNames{
    OpInfo{Opcode::Objects, "objects"},
    OpInfo{Opcode::Events, "events"},
    OpInfo{Opcode::UnseenEvents, "unseen_events"},
    OpInfo{Opcode::FilterColor, "filter_color"},
    OpInfo{Opcode::FilterShape, "filter_shape"},
    OpInfo{Opcode::FilterMaterial, "filter_material"},
    OpInfo{Opcode::FilterMass, "filter_mass"},
    OpInfo{Opcode::FilterCharged, "filter_charged"},
    OpInfo{Opcode::FilterUncharged, "filter_uncharged"},
    OpInfo{Opcode::FilterSame, "filter_same"},
    OpInfo{Opcode::FilterOpposite, "filter_opposite"},
    OpInfo{Opcode::FilterMoving, "filter_moving"},
    OpInfo{Opcode::FilterStationary, "filter_stationary"},
    OpInfo{Opcode::FilterCollision, "filter_collision"},
    OpInfo{Opcode::FilterIn, "filter_in"},
    OpInfo{Opcode::FilterOut, "filter_out"},
    OpInfo{Opcode::Unique, "unique"},
    OpInfo{Opcode::Count, "count"},
    OpInfo{Opcode::Exist, "exist"},
    OpInfo{Opcode::Negate, "negate"},
    OpInfo{Opcode::QueryColor, "query_color"},
    OpInfo{Opcode::QueryShape, "query_shape"},
    OpInfo{Opcode::QueryMaterial, "query_material"},
    OpInfo{Opcode::QueryMass, "query_mass"},
    OpInfo{Opcode::QueryCharged, "query_charged"},
    OpInfo{Opcode::QueryChargeRelation, "query_charge_relation"},
    OpInfo{Opcode::CounterfactHeavier, "counterfact_heavier"},
    OpInfo{Opcode::CounterfactLighter, "counterfact_lighter"},
    OpInfo{Opcode::CounterfactUncharged, "counterfact_uncharged"},
    OpInfo{Opcode::CounterfactOpposite, "counterfact_opposite"},
};

}  // namespace

std::string_view to_string(Opcode op) {
    for (const auto& info : kOpNames)
        if (info.code == op) return info.name;
    return "?";
}

std::optional<Opcode> parse_opcode(std::string_view name) {
    for (const auto& info : kOpNames)
        if (info.name == name) return info.code;
    return std::nullopt;
}

std::string_view to_string(Sort s) {
    switch (s) {
        case Sort::None: return "none";
        case Sort::ObjectSet: return "object_set";
        case Sort::EventSet: return "event_set";
        case Sort::Object: return "object";
        case Sort::Integer: return "integer";
        case Sort::Boolean: return "boolean";
        case Sort::Token: return "token";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Type checking

namespace {

enum class BranchRule { Forbidden, Optional, Required };

[[noreturn]] void type_error(std::size_t index, Opcode op, const std::string& why) {
    throw Error(ErrorKind::TypeMismatch,
                "op " + std::to_string(index) + " (" + std::string(to_string(op)) + "): " + why);
}

bool valid_frame_arg(const std::string& s) {
    if (s.empty() || s.size() > 6) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

void check_args(std::size_t index, const Op& op) {
    auto require_count = [&](std::size_t lo, std::size_t hi) {
        if (op.args.size() < lo || op.args.size() > hi)
            type_error(index, op.code, "wrong number of arguments");
    };
    switch (op.code) {
        case Opcode::FilterColor:
            require_count(1, 1);
            if (!parse_color(op.args[0])) type_error(index, op.code, "unknown color '" + op.args[0] + "'");
            break;
        case Opcode::FilterShape:
            require_count(1, 1);
            if (!parse_shape(op.args[0])) type_error(index, op.code, "unknown shape '" + op.args[0] + "'");
            break;
        case Opcode::FilterMaterial:
            require_count(1, 1);
            if (!parse_material(op.args[0]))
                type_error(index, op.code, "unknown material '" + op.args[0] + "'");
            break;
        case Opcode::FilterMass:
            require_count(1, 1);
            if (op.args[0] != "heavy" && op.args[0] != "light")
                type_error(index, op.code, "mass must be heavy or light");
            break;
        case Opcode::QueryChargeRelation:
            require_count(1, 1);
            if (op.args[0] != "same" && op.args[0] != "opposite")
                type_error(index, op.code, "relation must be same or opposite");
            break;
        case Opcode::FilterMoving:
        case Opcode::FilterStationary:
            require_count(0, 1);
            if (!op.args.empty() && !valid_frame_arg(op.args[0]))
                type_error(index, op.code, "frame argument must be a non-negative integer");
            break;
        default:
            require_count(0, 0);
    }
}

BranchRule branch_rule(Opcode op) {
    switch (op) {
        case Opcode::FilterSame:
        case Opcode::FilterOpposite:
        case Opcode::QueryChargeRelation: return BranchRule::Required;
        case Opcode::FilterCollision:
        case Opcode::FilterIn:
        case Opcode::FilterOut: return BranchRule::Optional;
        default: return BranchRule::Forbidden;
    }
}

bool is_source(Opcode op) {
    return op == Opcode::Objects || op == Opcode::Events || op == Opcode::UnseenEvents;
}

Sort apply(std::size_t index, Opcode op, Sort in) {
    auto need = [&](Sort s) {
        if (in != s)
            type_error(index, op,
                       "expects " + std::string(to_string(s)) + ", got " + std::string(to_string(in)));
    };
    switch (op) {
        case Opcode::Objects:
        case Opcode::Events:
        case Opcode::UnseenEvents:
            if (in != Sort::None) type_error(index, op, "is a source and must open the program");
            return op == Opcode::Objects ? Sort::ObjectSet : Sort::EventSet;
        case Opcode::FilterColor:
        case Opcode::FilterShape:
        case Opcode::FilterMaterial:
        case Opcode::FilterMass:
        case Opcode::FilterCharged:
        case Opcode::FilterUncharged:
        case Opcode::FilterSame:
        case Opcode::FilterOpposite:
        case Opcode::FilterMoving:
        case Opcode::FilterStationary: need(Sort::ObjectSet); return Sort::ObjectSet;
        case Opcode::FilterCollision:
        case Opcode::FilterIn:
        case Opcode::FilterOut: need(Sort::EventSet); return Sort::EventSet;
        case Opcode::Unique: need(Sort::ObjectSet); return Sort::Object;
        case Opcode::Count:
        case Opcode::Exist:
            if (in != Sort::ObjectSet && in != Sort::EventSet)
                type_error(index, op, "expects an object or event set, got " + std::string(to_string(in)));
            return op == Opcode::Count ? Sort::Integer : Sort::Boolean;
        case Opcode::Negate: need(Sort::Boolean); return Sort::Boolean;
        case Opcode::QueryColor:
        case Opcode::QueryShape:
        case Opcode::QueryMaterial:
        case Opcode::QueryMass: need(Sort::Object); return Sort::Token;
        case Opcode::QueryCharged:
        case Opcode::QueryChargeRelation: need(Sort::Object); return Sort::Boolean;
        case Opcode::CounterfactHeavier:
        case Opcode::CounterfactLighter:
        case Opcode::CounterfactUncharged:
        case Opcode::CounterfactOpposite: need(Sort::Object); return Sort::EventSet;
    }
    type_error(index, op, "unknown opcode");
}

}  // namespace

Sort typecheck(const Program& program, Sort input) {
    if (program.empty()) throw Error(ErrorKind::TypeMismatch, "empty program");
    Sort sort = input;
    for (std::size_t i = 0; i < program.size(); ++i) {
        const Op& op = program[i];
        if (is_source(op.code) && sort != Sort::None)
            type_error(i, op.code, "is a source and must open the program");
        check_args(i, op);
        const BranchRule rule = branch_rule(op.code);
        if (rule == BranchRule::Forbidden && !op.branch.empty())
            type_error(i, op.code, "takes no branch");
        if (rule == BranchRule::Required && op.branch.empty())
            type_error(i, op.code, "requires an object branch");
        if (!op.branch.empty()) {
            Sort b;
            try {
                b = typecheck(op.branch, Sort::None);
            } catch (const Error& e) {
                type_error(i, op.code, std::string("branch: ") + e.what());
            }
            if (b != Sort::Object) type_error(i, op.code, "branch must produce a single object");
        }
        sort = apply(i, op.code, sort);
    }
    return sort;
}

bool well_typed(const Program& program, Sort input) {
    try {
        typecheck(program, input);
        return true;
    } catch (const Error&) {
        return false;
    }
}

Program append(const Program& head, const Program& tail) {
    Program out = head;
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   question  := "what is the" attr "of" desc_sg "?"
//              | "what would happen if" desc_sg "were" cond "?"
//              | "what will happen next" "?"
//              | "is" desc_sg ("heavy or light" | "charged") "?"
//              | "are" desc_sg "and" desc_sg "carrying" ("opposite charges" | "the same charge") "?"
//              | "are there" ("any" | "no") desc_pl "?"
//              | "how many" desc_pl ("are there" | "carry the opposite charge to" desc_sg
//                                    | "carry the same charge as" desc_sg) "?"
//              | "does" desc_sg ("collide with" desc_sg | "enter the scene" | "exit the scene") "?"
//   option    := desc_sg "collides with" desc_sg "."
//   desc_sg   := "the" property* attribute* noun
//   desc_pl   := property* attribute* plural_noun
//   property  := heavy | light | charged | uncharged | moving | stationary
//   attribute := color | material
//   cond      := heavier | lighter | uncharged | "oppositely charged"

namespace {

struct Token {
    std::string text;
    std::size_t offset;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '?' || c == '.' || c == ',') {
            out.push_back({std::string(1, c), i});
            ++i;
        } else {
            const std::size_t start = i;
            std::string word;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   text[i] != '?' && text[i] != '.' && text[i] != ',') {
                word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
                ++i;
            }
            out.push_back({std::move(word), start});
        }
    }
    return out;
}

Op make_op(Opcode code, std::vector<std::string> args = {}, Program branch = {}) {
    return Op{code, std::move(args), std::move(branch)};
}

class Parser {
public:
    Parser(std::string_view text) : text_(text), tokens_(tokenize(text)) {}

    Program parse() {
        Program p;
        const std::string w = peek();
        if (w == "what") p = parse_what();
        else if (w == "is") p = parse_is();
        else if (w == "are") p = parse_are();
        else if (w == "how") p = parse_how_many();
        else if (w == "does") p = parse_does();
        else if (w == "the") p = parse_option();
        else fail("a question word");
        if (pos_ != tokens_.size()) fail("end of input");
        return p;
    }

private:
    std::string_view text_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    std::string peek(std::size_t ahead = 0) const {
        return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead].text : std::string();
    }

    std::size_t offset() const { return pos_ < tokens_.size() ? tokens_[pos_].offset : text_.size(); }

    [[noreturn]] void fail(const std::string& expected) const {
        const std::string found = pos_ < tokens_.size() ? "'" + tokens_[pos_].text + "'" : "end of input";
        throw Error(ErrorKind::Unparseable, "at offset " + std::to_string(offset()) + ": expected " +
                                                expected + ", found " + found);
    }

    void expect(std::string_view words) {
        std::size_t start = 0;
        while (start < words.size()) {
            std::size_t end = words.find(' ', start);
            if (end == std::string_view::npos) end = words.size();
            const std::string_view w = words.substr(start, end - start);
            if (peek() != w) fail("'" + std::string(w) + "'");
            ++pos_;
            start = end + 1;
        }
    }

    bool accept(std::string_view word) {
        if (peek() == word) {
            ++pos_;
            return true;
        }
        return false;
    }

    // Filters for property* attribute* noun; `plural` selects the noun form.
    Program parse_filters(bool plural) {
        Program filters;
        bool seen_attribute = false;
        for (;;) {
            const std::string w = peek();
            std::optional<Op> property;
            if (w == "heavy" || w == "light") property = make_op(Opcode::FilterMass, {w});
            else if (w == "charged") property = make_op(Opcode::FilterCharged);
            else if (w == "uncharged") property = make_op(Opcode::FilterUncharged);
            else if (w == "moving") property = make_op(Opcode::FilterMoving);
            else if (w == "stationary") property = make_op(Opcode::FilterStationary);
            if (property) {
                if (seen_attribute) fail("an attribute or noun");
                filters.push_back(*property);
                ++pos_;
                continue;
            }
            if (parse_color(w)) {
                filters.push_back(make_op(Opcode::FilterColor, {w}));
                seen_attribute = true;
                ++pos_;
                continue;
            }
            if (parse_material(w)) {
                filters.push_back(make_op(Opcode::FilterMaterial, {w}));
                seen_attribute = true;
                ++pos_;
                continue;
            }
            break;
        }
        const std::string noun = peek();
        if (plural) {
            if (noun == "objects") {
            } else if (auto s = parse_shape_plural(noun)) {
                filters.push_back(make_op(Opcode::FilterShape, {std::string(to_string(*s))}));
            } else {
                fail("a plural noun");
            }
        } else {
            if (noun == "object") {
            } else if (parse_shape(noun)) {
                filters.push_back(make_op(Opcode::FilterShape, {noun}));
            } else {
                fail("a noun");
            }
        }
        ++pos_;
        return filters;
    }

    // "the" desc -> [objects, filters..., unique]
    Program parse_desc_sg() {
        expect("the");
        Program p{make_op(Opcode::Objects)};
        for (auto& f : parse_filters(false)) p.push_back(std::move(f));
        p.push_back(make_op(Opcode::Unique));
        return p;
    }

    Program parse_desc_pl() {
        Program p{make_op(Opcode::Objects)};
        for (auto& f : parse_filters(true)) p.push_back(std::move(f));
        return p;
    }

    Program parse_what() {
        expect("what");
        if (accept("is")) {
            expect("the");
            const std::string attr = peek();
            Opcode q;
            if (attr == "color") q = Opcode::QueryColor;
            else if (attr == "shape") q = Opcode::QueryShape;
            else if (attr == "material") q = Opcode::QueryMaterial;
            else fail("color, shape or material");
            ++pos_;
            expect("of");
            Program p = parse_desc_sg();
            p.push_back(make_op(q));
            expect("?");
            return p;
        }
        if (accept("would")) {
            expect("happen if");
            Program p = parse_desc_sg();
            expect("were");
            const std::string c = peek();
            Opcode op;
            if (c == "heavier") op = Opcode::CounterfactHeavier;
            else if (c == "lighter") op = Opcode::CounterfactLighter;
            else if (c == "uncharged") op = Opcode::CounterfactUncharged;
            else if (c == "oppositely") op = Opcode::CounterfactOpposite;
            else fail("a counterfactual condition");
            ++pos_;
            if (op == Opcode::CounterfactOpposite) expect("charged");
            expect("?");
            p.push_back(make_op(op));
            return p;
        }
        expect("will happen next ?");
        return {make_op(Opcode::UnseenEvents)};
    }

    Program parse_is() {
        expect("is");
        Program p = parse_desc_sg();
        if (accept("charged")) {
            p.push_back(make_op(Opcode::QueryCharged));
        } else {
            expect("heavy or light");
            p.push_back(make_op(Opcode::QueryMass));
        }
        expect("?");
        return p;
    }

    Program parse_are() {
        expect("are");
        if (accept("there")) {
            bool negated = false;
            if (accept("no")) negated = true;
            else expect("any");
            Program p = parse_desc_pl();
            p.push_back(make_op(Opcode::Exist));
            if (negated) p.push_back(make_op(Opcode::Negate));
            expect("?");
            return p;
        }
        Program a = parse_desc_sg();
        expect("and");
        Program b = parse_desc_sg();
        expect("carrying");
        std::string relation;
        if (accept("opposite")) {
            expect("charges");
            relation = "opposite";
        } else {
            expect("the same charge");
            relation = "same";
        }
        expect("?");
        a.push_back(make_op(Opcode::QueryChargeRelation, {relation}, std::move(b)));
        return a;
    }

    Program parse_how_many() {
        expect("how many");
        Program p = parse_desc_pl();
        if (accept("are")) {
            expect("there");
        } else {
            expect("carry the");
            Opcode op;
            if (accept("opposite")) {
                expect("charge to");
                op = Opcode::FilterOpposite;
            } else {
                expect("same charge as");
                op = Opcode::FilterSame;
            }
            p.push_back(make_op(op, {}, parse_desc_sg()));
        }
        expect("?");
        p.push_back(make_op(Opcode::Count));
        return p;
    }

    Program parse_does() {
        expect("does");
        Program a = parse_desc_sg();
        Program p{make_op(Opcode::Events)};
        if (accept("collide")) {
            expect("with");
            Program b = parse_desc_sg();
            p.push_back(make_op(Opcode::FilterCollision, {}, std::move(a)));
            p.push_back(make_op(Opcode::FilterCollision, {}, std::move(b)));
        } else if (accept("enter")) {
            expect("the scene");
            p.push_back(make_op(Opcode::FilterIn, {}, std::move(a)));
        } else {
            expect("exit the scene");
            p.push_back(make_op(Opcode::FilterOut, {}, std::move(a)));
        }
        expect("?");
        p.push_back(make_op(Opcode::Exist));
        return p;
    }

    Program parse_option() {
        Program a = parse_desc_sg();
        expect("collides with");
        Program b = parse_desc_sg();
        expect(".");
        return {make_op(Opcode::FilterCollision, {}, std::move(a)),
                make_op(Opcode::FilterCollision, {}, std::move(b)), make_op(Opcode::Exist)};
    }
};

}  // namespace

Program parse(std::string_view text) {
    return Parser(text).parse();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

[[noreturn]] void no_surface_form(const std::string& why) {
    throw Error(ErrorKind::Unparseable, "program has no surface form: " + why);
}

bool is_property_filter(const Op& op) {
    switch (op.code) {
        case Opcode::FilterMass:
        case Opcode::FilterCharged:
        case Opcode::FilterUncharged:
        case Opcode::FilterMoving:
        case Opcode::FilterStationary: return op.args.empty() || op.code == Opcode::FilterMass;
        default: return false;
    }
}

std::string property_word(const Op& op) {
    switch (op.code) {
        case Opcode::FilterMass: return op.args[0];
        case Opcode::FilterCharged: return "charged";
        case Opcode::FilterUncharged: return "uncharged";
        case Opcode::FilterMoving: return "moving";
        case Opcode::FilterStationary: return "stationary";
        default: return {};
    }
}

// Renders filters[first, last) as "property* attribute* noun".
std::string render_filters(const Program& p, std::size_t first, std::size_t last, bool plural) {
    std::string out;
    bool seen_attribute = false;
    std::optional<Shape> noun;
    for (std::size_t i = first; i < last; ++i) {
        const Op& op = p[i];
        if (noun) no_surface_form("shape filter must be the last descriptor filter");
        std::string word;
        if (is_property_filter(op)) {
            if (seen_attribute) no_surface_form("property filter after attribute filter");
            word = property_word(op);
        } else if (op.code == Opcode::FilterColor || op.code == Opcode::FilterMaterial) {
            seen_attribute = true;
            word = op.args[0];
        } else if (op.code == Opcode::FilterShape) {
            noun = parse_shape(op.args[0]);
            continue;
        } else {
            no_surface_form("'" + std::string(to_string(op.code)) + "' inside a descriptor");
        }
        out += word;
        out += ' ';
    }
    if (noun) out += plural ? std::string(comphy::plural(*noun)) : std::string(to_string(*noun));
    else out += plural ? "objects" : "object";
    return out;
}

// [objects, filters..., unique] -> "the ..."
std::string render_desc_sg(const Program& p) {
    if (p.size() < 2 || p.front().code != Opcode::Objects || p.back().code != Opcode::Unique)
        no_surface_form("object reference must be [objects, filters..., unique]");
    return "the " + render_filters(p, 1, p.size() - 1, false);
}

std::string render_relation_desc(const Op& op) {
    if (op.branch.empty()) no_surface_form("event filter without object");
    return render_desc_sg(op.branch);
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string render_events(const Program& p) {
    const std::size_t n = p.size();
    if (n == 4 && p[1].code == Opcode::FilterCollision && p[2].code == Opcode::FilterCollision &&
        p[3].code == Opcode::Exist)
        return "Does " + render_relation_desc(p[1]) + " collide with " + render_relation_desc(p[2]) + "?";
    if (n == 3 && p[2].code == Opcode::Exist) {
        if (p[1].code == Opcode::FilterIn) return "Does " + render_relation_desc(p[1]) + " enter the scene?";
        if (p[1].code == Opcode::FilterOut) return "Does " + render_relation_desc(p[1]) + " exit the scene?";
    }
    no_surface_form("unsupported event question");
}

std::string render_objects(const Program& p) {
    const std::size_t n = p.size();
    const Op& last = p.back();
    const Program head(p.begin(), p.end() - 1);
    switch (last.code) {
        case Opcode::QueryColor:
        case Opcode::QueryShape:
        case Opcode::QueryMaterial: {
            const char* attr = last.code == Opcode::QueryColor   ? "color"
                               : last.code == Opcode::QueryShape ? "shape"
                                                                 : "material";
            return std::string("What is the ") + attr + " of " + render_desc_sg(head) + "?";
        }
        case Opcode::QueryMass: return "Is " + render_desc_sg(head) + " heavy or light?";
        case Opcode::QueryCharged: return "Is " + render_desc_sg(head) + " charged?";
        case Opcode::QueryChargeRelation: {
            const std::string tail =
                last.args[0] == "opposite" ? " carrying opposite charges?" : " carrying the same charge?";
            return "Are " + render_desc_sg(head) + " and " + render_desc_sg(last.branch) + tail;
        }
        case Opcode::CounterfactHeavier: return "What would happen if " + render_desc_sg(head) + " were heavier?";
        case Opcode::CounterfactLighter: return "What would happen if " + render_desc_sg(head) + " were lighter?";
        case Opcode::CounterfactUncharged:
            return "What would happen if " + render_desc_sg(head) + " were uncharged?";
        case Opcode::CounterfactOpposite:
            return "What would happen if " + render_desc_sg(head) + " were oppositely charged?";
        case Opcode::Count: {
            const Op& prev = p[n - 2];
            if (prev.code == Opcode::FilterSame || prev.code == Opcode::FilterOpposite) {
                const std::string rel = prev.code == Opcode::FilterOpposite ? " carry the opposite charge to "
                                                                            : " carry the same charge as ";
                return "How many " + render_filters(p, 1, n - 2, true) + rel + render_desc_sg(prev.branch) + "?";
            }
            return "How many " + render_filters(p, 1, n - 1, true) + " are there?";
        }
        case Opcode::Exist: return "Are there any " + render_filters(p, 1, n - 1, true) + "?";
        case Opcode::Negate:
            if (n >= 3 && p[n - 2].code == Opcode::Exist)
                return "Are there no " + render_filters(p, 1, n - 2, true) + "?";
            break;
        default: break;
    }
    no_surface_form("unsupported question shape");
}

}  // namespace

std::string render(const Program& program) {
    const Sort input = !program.empty() && program.front().code == Opcode::FilterCollision
                           ? Sort::EventSet
                           : Sort::None;
    typecheck(program, input);
    if (input == Sort::EventSet) {
        if (program.size() == 3 && program[1].code == Opcode::FilterCollision &&
            program[2].code == Opcode::Exist)
            return capitalize(render_relation_desc(program[0])) + " collides with " +
                   render_relation_desc(program[1]) + ".";
        no_surface_form("unsupported option shape");
    }
    switch (program.front().code) {
        case Opcode::UnseenEvents:
            if (program.size() == 1) return "What will happen next?";
            break;
        case Opcode::Events: return render_events(program);
        case Opcode::Objects: return render_objects(program);
        default: break;
    }
    no_surface_form("unsupported question shape");
}

}  // namespace comphy
