#include "comphy/serialization.hpp"

#include <fstream>
#include <map>

#include "comphy/error.hpp"

namespace comphy {

namespace {

template <typename T, typename Parse>
T parse_or_throw(const Json& j, Parse parse, const char* what) {
    const auto s = j.get<std::string>();
    if (auto v = parse(s)) return *v;
    throw Error(ErrorKind::Data, std::string("unknown ") + what + " '" + s + "'");
}

Json rect_json(const Rect& r) { return {r.x_min, r.y_min, r.x_max, r.y_max}; }
Rect rect_from(const Json& j) { return Rect{j.at(0), j.at(1), j.at(2), j.at(3)}; }

Json state_json(const ObjectState& s) {
    return {s.position.x, s.position.y, s.velocity.x, s.velocity.y, s.radius, s.present};
}
ObjectState state_from(const Json& j) {
    ObjectState s;
    s.position = {j.at(0), j.at(1)};
    s.velocity = {j.at(2), j.at(3)};
    s.radius = j.at(4);
    s.present = j.at(5);
    return s;
}

Json attrs_json(const StaticAttrs& a) {
    return {{"color", to_string(a.color)}, {"shape", to_string(a.shape)}, {"material", to_string(a.material)}};
}
StaticAttrs attrs_from(const Json& j) {
    StaticAttrs a;
    a.color = parse_or_throw<Color>(j.at("color"), parse_color, "color");
    a.shape = parse_or_throw<Shape>(j.at("shape"), parse_shape, "shape");
    a.material = parse_or_throw<Material>(j.at("material"), parse_material, "material");
    return a;
}

Json video_json(const Video& v) {
    Json objects = Json::array();
    for (const auto& a : v.objects) objects.push_back(attrs_json(a));
    Json events = Json::array();
    for (const auto& e : v.events) events.push_back(to_json(e));
    return {{"id", v.id}, {"objects", objects}, {"trajectory", to_json(v.trajectory)}, {"events", events}};
}
Video video_from(const Json& j) {
    Video v;
    v.id = j.at("id");
    for (const auto& a : j.at("objects")) v.objects.push_back(attrs_from(a));
    v.trajectory = trajectory_from_json(j.at("trajectory"));
    for (const auto& e : j.at("events")) v.events.push_back(event_from_json(e));
    return v;
}

}  // namespace

Json to_json(const SimConfig& c) {
    return {{"dt", c.dt},
            {"record_fps", c.record_fps},
            {"coulomb_k", c.coulomb_k},
            {"damping", c.damping},
            {"restitution", c.restitution},
            {"softening_min_dist", c.softening_min_dist},
            {"world_bounds", rect_json(c.world_bounds)}};
}

SimConfig sim_config_from_json(const Json& j) {
    SimConfig c;
    c.dt = j.value("dt", c.dt);
    c.record_fps = j.value("record_fps", c.record_fps);
    c.coulomb_k = j.value("coulomb_k", c.coulomb_k);
    c.damping = j.value("damping", c.damping);
    c.restitution = j.value("restitution", c.restitution);
    c.softening_min_dist = j.value("softening_min_dist", c.softening_min_dist);
    if (j.contains("world_bounds")) c.world_bounds = rect_from(j.at("world_bounds"));
    c.validate();
    return c;
}

Json to_json(const GenConfig& c) {
    return {{"seed", c.seed},
            {"counts", {{"train", c.counts.train}, {"val", c.counts.val}, {"test", c.counts.test}}},
            {"sim", to_json(c.sim)},
            {"max_attempts", c.max_attempts},
            {"speed_min", c.speed_min},
            {"speed_max", c.speed_max},
            {"min_objects", c.min_objects},
            {"max_objects", c.max_objects},
            {"radius_min", c.radius_min},
            {"radius_max", c.radius_max},
            {"p_heavy", c.p_heavy},
            {"p_charged", c.p_charged},
            {"p_at_rest", c.p_at_rest},
            {"p_entering", c.p_entering},
            {"p_target_collision", c.p_target_collision},
            {"p_late_collision", c.p_late_collision}};
}

GenConfig gen_config_from_json(const Json& j) {
    GenConfig c;
    c.seed = j.value("seed", c.seed);
    if (j.contains("counts")) {
        const Json& k = j.at("counts");
        c.counts.train = k.value("train", c.counts.train);
        c.counts.val = k.value("val", c.counts.val);
        c.counts.test = k.value("test", c.counts.test);
    }
    if (j.contains("sim")) c.sim = sim_config_from_json(j.at("sim"));
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    c.speed_min = j.value("speed_min", c.speed_min);
    c.speed_max = j.value("speed_max", c.speed_max);
    c.min_objects = j.value("min_objects", c.min_objects);
    c.max_objects = j.value("max_objects", c.max_objects);
    c.radius_min = j.value("radius_min", c.radius_min);
    c.radius_max = j.value("radius_max", c.radius_max);
    c.p_heavy = j.value("p_heavy", c.p_heavy);
    c.p_charged = j.value("p_charged", c.p_charged);
    c.p_at_rest = j.value("p_at_rest", c.p_at_rest);
    c.p_entering = j.value("p_entering", c.p_entering);
    c.p_target_collision = j.value("p_target_collision", c.p_target_collision);
    c.p_late_collision = j.value("p_late_collision", c.p_late_collision);
    c.validate();
    return c;
}

Json to_json(const Trajectory& t) {
    Json frames = Json::array();
    for (const auto& frame : t.frames) {
        Json row = Json::array();
        for (const auto& s : frame)
            row.push_back({s.position.x, s.position.y, 2.0 * s.radius, 2.0 * s.radius, s.present});
        frames.push_back(std::move(row));
    }
    return frames;
}

Trajectory trajectory_from_json(const Json& j) {
    Trajectory t;
    if (!j.is_array()) throw Error(ErrorKind::Data, "trajectory is not an array");
    t.frames.reserve(j.size());
    for (const auto& row : j) {
        std::vector<ObjectState> frame;
        frame.reserve(row.size());
        for (const auto& cell : row) {
            if (cell.size() != 5) throw Error(ErrorKind::Data, "trajectory cell must be [x, y, w, h, present]");
            ObjectState s;
            s.position = {cell[0].get<double>(), cell[1].get<double>()};
            s.radius = cell[2].get<double>() / 2.0;
            s.present = cell[4].get<bool>();
            frame.push_back(s);
        }
        if (!t.frames.empty() && frame.size() != t.frames.front().size())
            throw Error(ErrorKind::Data, "ragged trajectory");
        t.frames.push_back(std::move(frame));
    }
    return t;
}

Json to_json(const Event& e) {
    Json out{{"kind", to_string(e.kind)}, {"objects", e.participants}, {"frame", e.frame}};
    if (!e.video_id.empty()) out["video"] = e.video_id;
    return out;
}

Event event_from_json(const Json& j) {
    Event e;
    e.kind = parse_or_throw<EventKind>(j.at("kind"), parse_event_kind, "event kind");
    e.participants = j.at("objects").get<std::vector<int>>();
    e.frame = j.at("frame");
    e.video_id = j.value("video", std::string{});
    return e;
}

Json to_json(const PropertyGraph& g) {
    Json mass = Json::array();
    for (auto m : g.mass) mass.push_back(to_string(m));
    Json rel = Json::array();
    for (auto r : g.relations) rel.push_back(to_string(r));
    Json out{{"mass", mass}, {"relations", rel}};
    if (g.signs) out["signs"] = *g.signs;
    if (g.has_scores()) {
        out["heavy_scores"] = g.heavy_scores;
        out["relation_scores"] = g.relation_scores;
    }
    return out;
}

PropertyGraph property_graph_from_json(const Json& j) {
    PropertyGraph g;
    for (const auto& m : j.at("mass")) g.mass.push_back(parse_or_throw<MassLabel>(m, parse_mass_label, "mass label"));
    for (const auto& r : j.at("relations"))
        g.relations.push_back(parse_or_throw<Relation>(r, parse_relation, "relation"));
    if (g.relations.size() != edge_count(g.size())) throw Error(ErrorKind::Data, "relation count does not match nodes");
    if (j.contains("signs")) g.signs = j.at("signs").get<std::vector<int>>();
    if (j.contains("heavy_scores")) {
        g.heavy_scores = j.at("heavy_scores").get<std::vector<double>>();
        g.relation_scores = j.at("relation_scores").get<std::vector<RelationScores>>();
    }
    return g;
}

Json to_json(const Program& p) {
    Json out = Json::array();
    for (const Op& op : p) {
        Json o{{"op", to_string(op.code)}, {"args", op.args}};
        if (!op.branch.empty()) o["branch"] = to_json(op.branch);
        out.push_back(std::move(o));
    }
    return out;
}

Program program_from_json(const Json& j) {
    Program p;
    for (const auto& o : j) {
        Op op;
        op.code = parse_or_throw<Opcode>(o.at("op"), parse_opcode, "opcode");
        op.args = o.value("args", std::vector<std::string>{});
        if (o.contains("branch")) op.branch = program_from_json(o.at("branch"));
        p.push_back(std::move(op));
    }
    return p;
}

Json observed_line(const ObservedSet& set, const std::vector<Question>& questions) {
    Json roster = Json::array();
    for (std::size_t i = 0; i < set.roster().size(); ++i) {
        Json a = attrs_json(set.roster()[i]);
        a["id"] = i;
        roster.push_back(std::move(a));
    }
    Json refs = Json::array();
    for (const auto& v : set.references) refs.push_back(video_json(v));
    Json qs = Json::array();
    for (const auto& q : questions) {
        Json o{{"qid", q.qid}, {"kind", to_string(q.kind)}, {"text", q.text}};
        if (!q.choices.empty()) {
            Json cs = Json::array();
            for (const auto& c : q.choices) cs.push_back(c.text);
            o["choices"] = cs;
        }
        qs.push_back(std::move(o));
    }
    return {{"set_id", set.set_id}, {"roster", roster}, {"target", video_json(set.target)},
            {"references", refs}, {"questions", qs}};
}

SetRecord observed_from_line(const Json& j) {
    SetRecord r;
    r.observed.set_id = j.at("set_id");
    r.observed.target = video_from(j.at("target"));
    for (const auto& v : j.at("references")) r.observed.references.push_back(video_from(v));
    for (const auto& o : j.value("questions", Json::array())) {
        Question q;
        q.qid = o.at("qid");
        q.set_id = r.observed.set_id;
        q.kind = parse_or_throw<QuestionKind>(o.at("kind"), parse_question_kind, "question kind");
        q.text = o.at("text");
        for (const auto& c : o.value("choices", Json::array())) q.choices.push_back(Choice{c.get<std::string>(), {}, false});
        r.questions.push_back(std::move(q));
    }
    return r;
}

Json truth_line(const std::string& set_id, const SetTruth& truth, const std::vector<Question>& questions) {
    Json props = Json::array();
    for (const auto& p : truth.props) props.push_back({{"mass", p.mass}, {"charge", p.charge}});
    Json initial = Json::array();
    for (const auto& video : truth.initial_states) {
        Json row = Json::array();
        for (const auto& s : video) row.push_back(state_json(s));
        initial.push_back(std::move(row));
    }
    Json charge_events = Json::array();
    for (const auto& video : truth.charge_events) {
        Json row = Json::array();
        for (const auto& e : video) row.push_back(to_json(e));
        charge_events.push_back(std::move(row));
    }
    Json qs = Json::array();
    for (const auto& q : questions) {
        Json o{{"qid", q.qid}, {"family", q.family}, {"program", to_json(q.program)}};
        if (q.kind == QuestionKind::Factual) {
            o["answer"] = q.answer;
        } else {
            Json labels = Json::array();
            Json programs = Json::array();
            for (const auto& c : q.choices) {
                labels.push_back(c.correct);
                programs.push_back(to_json(c.program));
            }
            o["labels"] = labels;
            o["choice_programs"] = programs;
        }
        qs.push_back(std::move(o));
    }
    return {{"set_id", set_id},
            {"graph", to_json(truth.graph)},
            {"props", props},
            {"extension", to_json(truth.extension)},
            {"alignment", truth.alignment},
            {"initial_states", initial},
            {"charge_events", charge_events},
            {"questions", qs}};
}

GtRecord truth_from_line(const Json& j) {
    GtRecord r;
    r.set_id = j.at("set_id");
    r.truth.graph = property_graph_from_json(j.at("graph"));
    for (const auto& p : j.at("props")) r.truth.props.push_back(PhysProps{p.at("mass"), p.at("charge")});
    r.truth.extension = trajectory_from_json(j.at("extension"));
    r.truth.alignment = j.at("alignment").get<Alignment>();
    for (const auto& video : j.at("initial_states")) {
        std::vector<ObjectState> row;
        for (const auto& s : video) row.push_back(state_from(s));
        r.truth.initial_states.push_back(std::move(row));
    }
    for (const auto& video : j.at("charge_events")) {
        std::vector<Event> row;
        for (const auto& e : video) row.push_back(event_from_json(e));
        r.truth.charge_events.push_back(std::move(row));
    }
    for (const auto& o : j.value("questions", Json::array())) {
        Question q;
        q.qid = o.at("qid");
        q.set_id = r.set_id;
        q.family = o.at("family");
        q.program = program_from_json(o.at("program"));
        if (o.contains("answer")) {
            q.kind = QuestionKind::Factual;
            q.answer = o.at("answer");
        } else {
            q.kind = q.family == "predictive" ? QuestionKind::Predictive : QuestionKind::Counterfactual;
            const auto& labels = o.at("labels");
            const auto& programs = o.at("choice_programs");
            for (std::size_t i = 0; i < labels.size(); ++i)
                q.choices.push_back(Choice{{}, program_from_json(programs.at(i)), labels.at(i).get<bool>()});
        }
        r.questions.push_back(std::move(q));
    }
    return r;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    std::vector<Json> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    for (const auto& j : lines) out << j.dump() << '\n';
}

std::vector<Question> merge_questions(const SetRecord& observed, const GtRecord& gt) {
    std::map<std::string, const Question*> hidden;
    for (const auto& q : gt.questions) hidden[q.qid] = &q;
    std::vector<Question> out;
    for (const auto& q : observed.questions) {
        auto it = hidden.find(q.qid);
        if (it == hidden.end()) throw Error(ErrorKind::Data, "question " + q.qid + " missing from ground truth");
        Question full = q;
        full.family = it->second->family;
        full.program = it->second->program;
        full.answer = it->second->answer;
        if (it->second->choices.size() != q.choices.size())
            throw Error(ErrorKind::Data, "choice count mismatch for " + q.qid);
        for (std::size_t i = 0; i < q.choices.size(); ++i) {
            full.choices[i].program = it->second->choices[i].program;
            full.choices[i].correct = it->second->choices[i].correct;
        }
        out.push_back(std::move(full));
    }
    return out;
}

}  // namespace comphy
