#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comphy/genset.hpp"
#include "comphy/qlang.hpp"
#include "comphy/questions.hpp"
#include "comphy/scene.hpp"

namespace comphy {

using Json = nlohmann::json;

Json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const Json& j);
Json to_json(const GenConfig& c);
GenConfig gen_config_from_json(const Json& j);

/// [frame][object][x, y, w, h, present]; velocities are not stored.
Json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j);

Json to_json(const Event& e);
Event event_from_json(const Json& j);

Json to_json(const PropertyGraph& g);
PropertyGraph property_graph_from_json(const Json& j);

Json to_json(const Program& p);
Program program_from_json(const Json& j);

/// A set together with its questions as stored on disk: the observable
/// record (and question texts) on one line of sets.jsonl, the hidden truth
/// (graph, extension, answers and labels) on the matching line of gt.jsonl.
struct SetRecord {
    ObservedSet observed;
    std::vector<Question> questions;  // answers/labels/programs only with gt
};

struct GtRecord {
    std::string set_id;
    SetTruth truth;
    std::vector<Question> questions;  // qid, family, program, answer, labels
};

Json observed_line(const ObservedSet& set, const std::vector<Question>& questions);
SetRecord observed_from_line(const Json& j);
Json truth_line(const std::string& set_id, const SetTruth& truth, const std::vector<Question>& questions);
GtRecord truth_from_line(const Json& j);

/// Reads every line of a JSON-Lines file. Throws Error(Data) with the line
/// number on malformed input.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

/// Reassembles full questions (text + program + answers) from both files.
std::vector<Question> merge_questions(const SetRecord& observed, const GtRecord& gt);

}  // namespace comphy
