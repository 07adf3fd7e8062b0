#include "comphy/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "comphy/error.hpp"
#include "comphy/parallel.hpp"
#include "comphy/propgraph.hpp"

namespace comphy {

std::string_view to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::Exact: return "exact";
        case PipelineMode::Learned: return "learned";
        case PipelineMode::FitOracle: return "fit_oracle";
    }
    return "?";
}

std::optional<PipelineMode> parse_pipeline_mode(std::string_view s) {
    for (auto m : {PipelineMode::Exact, PipelineMode::Learned, PipelineMode::FitOracle})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

void RunConfig::validate() const {
    if (sets.empty() || !std::filesystem::exists(sets))
        throw Error(ErrorKind::Config, "sets file '" + sets.string() + "' does not exist");
    if (!gt.empty() && !std::filesystem::exists(gt))
        throw Error(ErrorKind::Config, "ground-truth file '" + gt.string() + "' does not exist");
    if (mode == PipelineMode::Learned) {
        if (checkpoint.empty()) throw Error(ErrorKind::Config, "mode learned requires a checkpoint");
        if (!std::filesystem::exists(checkpoint))
            throw Error(ErrorKind::Config, "checkpoint '" + checkpoint.string() + "' does not exist");
    }
    if (report_format != "json" && report_format != "text")
        throw Error(ErrorKind::Config, "report format must be json or text");
    sim.validate();
}

Json to_json(const RunConfig& c) {
    return {{"mode", to_string(c.mode)},
            {"exec", c.exec == ExecMode::Soft ? "soft" : "crisp"},
            {"sets", c.sets.string()},
            {"gt", c.gt.string()},
            {"checkpoint", c.checkpoint.string()},
            {"out", c.out.string()},
            {"seed", c.seed},
            {"report_format", c.report_format},
            {"sim", to_json(c.sim)}};
}

RunConfig run_config_from_json(const Json& j) {
    RunConfig c;
    if (j.contains("mode")) {
        auto m = parse_pipeline_mode(j.at("mode").get<std::string>());
        if (!m) throw Error(ErrorKind::Config, "unknown mode " + j.at("mode").dump());
        c.mode = *m;
    }
    const std::string exec = j.value("exec", "crisp");
    if (exec != "crisp" && exec != "soft") throw Error(ErrorKind::Config, "exec must be crisp or soft");
    c.exec = exec == "soft" ? ExecMode::Soft : ExecMode::Crisp;
    c.sets = j.value("sets", "");
    c.gt = j.value("gt", "");
    c.checkpoint = j.value("checkpoint", "");
    c.out = j.value("out", "");
    c.seed = j.value("seed", std::uint64_t{0});
    c.report_format = j.value("report_format", "json");
    if (j.contains("sim")) c.sim = sim_config_from_json(j.at("sim"));
    return c;
}

// ---------------------------------------------------------------------------
// Predictions

Json to_json(const Prediction& p) {
    Json j{{"qid", p.qid}, {"kind", to_string(p.kind)}};
    if (p.kind == QuestionKind::Factual) j["answer"] = p.answer;
    else j["choice_labels"] = p.choice_labels;
    j["mode"] = p.mode;
    j["backend"] = p.backend;
    if (!p.error.empty()) j["error"] = p.error;
    return j;
}

Prediction prediction_from_json(const Json& j) {
    Prediction p;
    p.qid = j.at("qid");
    auto k = parse_question_kind(j.at("kind").get<std::string>());
    if (!k) throw Error(ErrorKind::Data, "unknown question kind in prediction " + p.qid);
    p.kind = *k;
    p.answer = j.value("answer", "");
    p.choice_labels = j.value("choice_labels", std::vector<bool>{});
    p.mode = j.value("mode", "");
    p.backend = j.value("backend", "");
    p.error = j.value("error", "");
    return p;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::vector<Prediction> out;
    for (const auto& j : read_jsonl(path)) {
        try {
            out.push_back(prediction_from_json(j));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Data, path.string() + ": " + e.what());
        }
    }
    return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds) {
    std::vector<Json> lines;
    lines.reserve(preds.size());
    for (const auto& p : preds) lines.push_back(to_json(p));
    write_jsonl(path, lines);
}

// ---------------------------------------------------------------------------
// Pipeline

PropertyGraph infer_graph(const ObservedSet& set, PipelineMode mode, const Models* models, const SimConfig& sim) {
    switch (mode) {
        case PipelineMode::Exact: return infer_properties(set);
        case PipelineMode::FitOracle: return fit_by_simulation(set, sim).graph;
        case PipelineMode::Learned:
            if (!models) throw Error(ErrorKind::Config, "learned mode without models");
            return ppi_infer(models->ppi, set);
    }
    return {};
}

std::vector<Prediction> answer_set(const SetRecord& record, PipelineMode mode, ExecMode exec, const Models* models,
                                   const SimConfig& sim) {
    std::vector<Prediction> out;
    std::shared_ptr<const DynamicsBackend> backend;
    if (mode == PipelineMode::Learned)
        backend = std::make_shared<LearnedBackend>(std::make_shared<const DynModel>(models->dyn), sim.world_bounds);
    else
        backend = std::make_shared<ExactBackend>(sim);

    std::string set_error;
    ExecContext ctx;
    try {
        ctx = make_context(record.observed, infer_graph(record.observed, mode, models, sim), backend);
    } catch (const Error& e) {
        set_error = e.what();
    }
    for (const Question& q : record.questions) {
        Prediction p;
        p.qid = q.qid;
        p.kind = q.kind;
        p.mode = exec == ExecMode::Soft ? "soft" : "crisp";
        p.backend = std::string(backend->name());
        if (q.kind != QuestionKind::Factual) p.choice_labels.assign(q.choices.size(), false);
        if (!set_error.empty()) {
            p.error = set_error;
            out.push_back(std::move(p));
            continue;
        }
        try {
            const Program program = parse(q.text);
            if (q.kind == QuestionKind::Factual) {
                p.answer = answer_token(execute(program, ctx, exec));
            } else {
                std::vector<Program> choices;
                for (const auto& c : q.choices) choices.push_back(parse(c.text));
                const auto scores = evaluate_choices(program, choices, ctx, exec);
                for (std::size_t i = 0; i < scores.size(); ++i) p.choice_labels[i] = scores[i] > 0.5;
            }
        } catch (const Error& e) {
            p.error = e.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> answer_corpus(const RunConfig& cfg) {
    cfg.validate();
    std::optional<Models> models;
    if (cfg.mode == PipelineMode::Learned) models = load_checkpoint(cfg.checkpoint);
    const LoadedSplit split = load_split(cfg.sets);
    std::vector<std::vector<Prediction>> per_set(split.sets.size());
    parallel_for(split.sets.size(), [&](std::size_t i) {
        per_set[i] = answer_set(split.sets[i], cfg.mode, cfg.exec, models ? &*models : nullptr, cfg.sim);
    });
    std::vector<Prediction> out;
    for (auto& p : per_set) out.insert(out.end(), p.begin(), p.end());
    if (!cfg.out.empty()) write_predictions(cfg.out, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

Report evaluate(const std::vector<Prediction>& predictions, const std::vector<Question>& gt) {
    std::map<std::string, const Prediction*> by_qid;
    for (const auto& p : predictions) by_qid[p.qid] = &p;
    std::vector<std::string> missing;
    for (const auto& q : gt)
        if (!by_qid.count(q.qid)) missing.push_back(q.qid);
    std::map<std::string, const Question*> gt_qid;
    for (const auto& q : gt) gt_qid[q.qid] = &q;
    for (const auto& p : predictions)
        if (!gt_qid.count(p.qid)) missing.push_back(p.qid);
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 10) list += ", ... (" + std::to_string(missing.size()) + " total)";
        throw Error(ErrorKind::Data, "unmatched qids: " + list);
    }

    Report r;
    for (const auto& q : gt) {
        const Prediction& p = *by_qid.at(q.qid);
        KindScore& k = r.kinds[std::string(to_string(q.kind))];
        KindScore& f = r.families[q.family];
        ++r.questions;
        for (KindScore* s : {&k, &f}) {
            ++s->questions;
            if (!p.error.empty()) ++s->errors;
            if (p.error.find(to_string(ErrorKind::InsufficientEvidence)) != std::string::npos)
                ++s->insufficient_evidence;
        }
        bool ok = true;
        if (q.kind == QuestionKind::Factual) {
            ok = p.error.empty() && p.answer == q.answer;
        } else {
            for (std::size_t i = 0; i < q.choices.size(); ++i) {
                const bool hit = p.error.empty() && i < p.choice_labels.size() &&
                                 p.choice_labels[i] == q.choices[i].correct;
                ok = ok && hit;
                for (KindScore* s : {&k, &f}) {
                    ++s->options;
                    if (hit) ++s->options_correct;
                }
            }
        }
        if (ok) {
            ++k.correct;
            ++f.correct;
        }
    }
    return r;
}

namespace {

Json score_json(const KindScore& s, bool multiple_choice) {
    Json j{{"questions", s.questions}, {"correct", s.correct}, {"errors", s.errors},
           {"insufficient_evidence", s.insufficient_evidence}};
    if (multiple_choice) {
        j["per_question"] = s.accuracy();
        j["per_option"] = s.per_option();
        j["options"] = s.options;
        j["options_correct"] = s.options_correct;
    } else {
        j["accuracy"] = s.accuracy();
    }
    return j;
}

}  // namespace

Json to_json(const Report& r) {
    Json kinds = Json::object();
    for (const auto& [k, s] : r.kinds) kinds[k] = score_json(s, k != "factual");
    Json families = Json::object();
    for (const auto& [f, s] : r.families) families[f] = score_json(s, s.options > 0);
    return {{"questions", r.questions}, {"kinds", kinds}, {"families", families}, {"config", r.config}};
}

std::string report_table(const Report& r) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %9s %9s %11s %12s %7s\n", "", "questions", "accuracy", "per-option",
                  "per-question", "errors");
    out << line;
    auto fixed = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    auto row = [&](const std::string& name, const KindScore& s) {
        const bool mc = s.options > 0;
        const std::string acc = mc ? "-" : fixed(s.accuracy());
        const std::string opt = mc ? fixed(s.per_option()) : "-";
        const std::string per_q = mc ? fixed(s.accuracy()) : "-";
        std::snprintf(line, sizeof line, "%-24s %9zu %9s %11s %12s %7zu\n", name.c_str(), s.questions, acc.c_str(),
                      opt.c_str(), per_q.c_str(), s.errors);
        out << line;
    };
    for (const char* k : {"factual", "counterfactual", "predictive"})
        if (auto it = r.kinds.find(k); it != r.kinds.end()) row(k, it->second);
    out << '\n';
    for (const auto& [f, s] : r.families) row("  " + f, s);
    return out.str();
}

// ---------------------------------------------------------------------------
// Blind baselines

std::optional<Baseline> parse_baseline(std::string_view s) {
    if (s == "random") return Baseline::Random;
    if (s == "frequent") return Baseline::Frequent;
    return std::nullopt;
}

namespace {

std::string text_family(const Question& q) {
    try {
        return question_family(parse(q.text));
    } catch (const Error&) {
        return "unknown";
    }
}

}  // namespace

FrequentTable frequent_table(const std::vector<Question>& train_gt) {
    std::map<std::string, std::map<std::string, std::size_t>> answers;
    std::map<std::string, std::array<std::size_t, 2>> labels;
    for (const auto& q : train_gt) {
        if (q.kind == QuestionKind::Factual) ++answers[q.family][q.answer];
        else
            for (const auto& c : q.choices) ++labels[q.family][c.correct ? 1 : 0];
    }
    FrequentTable t;
    for (const auto& [family, counts] : answers) {
        std::size_t best = 0;
        for (const auto& [a, n] : counts)  // map order: ties keep the smallest
            if (n > best) best = n, t.answers[family] = a;
    }
    for (const auto& [family, counts] : labels) t.labels[family] = counts[1] > counts[0];
    return t;
}

std::vector<Prediction> blind_baseline(Baseline kind, const std::vector<Question>& train_gt,
                                       const std::vector<Question>& eval, std::uint64_t seed) {
    const FrequentTable table = kind == Baseline::Frequent ? frequent_table(train_gt) : FrequentTable{};
    Rng rng(seed);
    std::vector<Prediction> out;
    for (const auto& q : eval) {
        Prediction p;
        p.qid = q.qid;
        p.kind = q.kind;
        p.mode = "blind";
        p.backend = kind == Baseline::Random ? "random" : "frequent";
        const std::string family = text_family(q);
        if (q.kind == QuestionKind::Factual) {
            if (kind == Baseline::Random) {
                const auto space = answer_space(family);
                p.answer = space[rng.below(space.size())];
            } else if (auto it = table.answers.find(family); it != table.answers.end()) {
                p.answer = it->second;
            } else {
                p.answer = answer_space(family).front();
            }
        } else {
            for (std::size_t i = 0; i < q.choices.size(); ++i) {
                if (kind == Baseline::Random) {
                    p.choice_labels.push_back(rng.bernoulli(0.5));
                } else {
                    auto it = table.labels.find(family);
                    p.choice_labels.push_back(it != table.labels.end() && it->second);
                }
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Question> load_gt_questions(const std::filesystem::path& gt) {
    std::vector<Question> out;
    for (const auto& j : read_jsonl(gt)) {
        try {
            auto r = truth_from_line(j);
            out.insert(out.end(), r.questions.begin(), r.questions.end());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Data, gt.string() + ": " + e.what());
        }
    }
    return out;
}

Json to_json(const TrainConfig& c) {
    return {{"seed", c.seed},
            {"hidden", c.hidden},
            {"lr", c.lr},
            {"momentum", c.momentum},
            {"batch", c.batch},
            {"ground_epochs", c.ground_epochs},
            {"ppi_epochs", c.ppi_epochs},
            {"dyn_epochs", c.dyn_epochs},
            {"window_stride", c.window_stride},
            {"fact_weight", c.fact_weight},
            {"grad_clip", c.grad_clip}};
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.hidden = j.value("hidden", c.hidden);
        c.lr = j.value("lr", c.lr);
        c.momentum = j.value("momentum", c.momentum);
        c.batch = j.value("batch", c.batch);
        c.ground_epochs = j.value("ground_epochs", c.ground_epochs);
        c.ppi_epochs = j.value("ppi_epochs", c.ppi_epochs);
        c.dyn_epochs = j.value("dyn_epochs", c.dyn_epochs);
        c.window_stride = j.value("window_stride", c.window_stride);
        c.fact_weight = j.value("fact_weight", c.fact_weight);
        c.grad_clip = j.value("grad_clip", c.grad_clip);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Config, std::string("train config: ") + e.what());
    }
    if (c.hidden < 1 || c.batch < 1 || c.lr <= 0.0 || c.ppi_epochs < 0 || c.dyn_epochs < 0 || c.ground_epochs < 0)
        throw Error(ErrorKind::Config, "train config: sizes, epochs and learning rate must be positive");
    return c;
}

std::vector<Question> load_questions(const std::filesystem::path& sets, const std::filesystem::path& gt) {
    const LoadedSplit split = load_split(sets, gt);
    std::vector<Question> out;
    for (std::size_t i = 0; i < split.sets.size(); ++i) {
        auto qs = merge_questions(split.sets[i], split.gt[i]);
        out.insert(out.end(), qs.begin(), qs.end());
    }
    return out;
}

}  // namespace comphy
