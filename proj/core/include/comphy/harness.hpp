#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comphy/corpus.hpp"
#include "comphy/executor.hpp"
#include "comphy/neural.hpp"
#include "comphy/serialization.hpp"

namespace comphy {

enum class PipelineMode { Exact, Learned, FitOracle };

std::string_view to_string(PipelineMode m);
std::optional<PipelineMode> parse_pipeline_mode(std::string_view s);

struct RunConfig {
    PipelineMode mode = PipelineMode::Exact;
    ExecMode exec = ExecMode::Crisp;
    std::filesystem::path sets;
    std::filesystem::path gt;
    std::filesystem::path checkpoint;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    std::string report_format = "json";  // json or text
    SimConfig sim;

    /// Throws Error(Config) when an input is missing or the mode lacks its
    /// artifacts.
    void validate() const;
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

struct Prediction {
    std::string qid;
    QuestionKind kind = QuestionKind::Factual;
    std::string answer;               // factual
    std::vector<bool> choice_labels;  // multiple choice
    std::string mode;                 // crisp or soft
    std::string backend;
    std::string error;  // non-empty when the pipeline failed on this question
    bool operator==(const Prediction&) const = default;
};

Json to_json(const Prediction& p);
Prediction prediction_from_json(const Json& j);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);

/// Properties of one set under the pipeline mode.
PropertyGraph infer_graph(const ObservedSet& set, PipelineMode mode, const Models* models, const SimConfig& sim);

/// Parses and executes every question of one set; failures are recorded per
/// question.
std::vector<Prediction> answer_set(const SetRecord& record, PipelineMode mode, ExecMode exec, const Models* models,
                                   const SimConfig& sim = {});

/// Runs the pipeline over cfg.sets and writes cfg.out (when set) in file
/// order.
std::vector<Prediction> answer_corpus(const RunConfig& cfg);

struct KindScore {
    std::size_t questions = 0;
    std::size_t correct = 0;
    std::size_t options = 0;
    std::size_t options_correct = 0;
    std::size_t errors = 0;
    std::size_t insufficient_evidence = 0;

    double accuracy() const { return questions ? static_cast<double>(correct) / static_cast<double>(questions) : 0.0; }
    double per_option() const {
        return options ? static_cast<double>(options_correct) / static_cast<double>(options) : 0.0;
    }
};

struct Report {
    std::map<std::string, KindScore> kinds;  // factual, counterfactual, predictive
    std::map<std::string, KindScore> families;
    std::size_t questions = 0;
    Json config;
};

/// Factual: exact string match. Multiple choice: per option, and per
/// question when every option matches. Throws Error(Data) listing qids that
/// do not pair up.
Report evaluate(const std::vector<Prediction>& predictions, const std::vector<Question>& gt);

Json to_json(const Report& r);
/// Aligned plain-text table.
std::string report_table(const Report& r);

enum class Baseline { Random, Frequent };
std::optional<Baseline> parse_baseline(std::string_view s);

/// Blind answers from the question text only. Random draws from the family's
/// answer space (options: fair coin); Frequent answers the modal training
/// answer per family (ties: lexicographically smallest; options: modal label).
std::vector<Prediction> blind_baseline(Baseline kind, const std::vector<Question>& train_gt,
                                       const std::vector<Question>& eval, std::uint64_t seed);

/// Family -> modal factual answer, and family -> modal option label.
struct FrequentTable {
    std::map<std::string, std::string> answers;
    std::map<std::string, bool> labels;
};
FrequentTable frequent_table(const std::vector<Question>& train_gt);

/// Questions with programs and answers from gt.jsonl alone (no texts).
std::vector<Question> load_gt_questions(const std::filesystem::path& gt);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

/// Every question with text, program and answers from a sets/gt pair.
std::vector<Question> load_questions(const std::filesystem::path& sets, const std::filesystem::path& gt);

}  // namespace comphy
