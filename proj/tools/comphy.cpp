#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "comphy/corpus.hpp"
#include "comphy/error.hpp"
#include "comphy/harness.hpp"
#include "comphy/neural.hpp"
#include "comphy/parallel.hpp"
#include "comphy/propgraph.hpp"

namespace fs = std::filesystem;
using namespace comphy;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
};

Json read_config(const std::string& path) {
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Config, path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path);
    out << text;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty() || !fs::exists(path)) throw Error(ErrorKind::Config, what + " '" + path + "' does not exist");
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::optional<int> train, val, test;
    std::string out;
};

int run_generate(const Globals& g, const GenerateArgs& a) {
    const Json j = read_config(g.config);
    GenConfig cfg = j.empty() ? GenConfig{} : gen_config_from_json(j);
    if (g.seed) cfg.seed = *g.seed;
    if (a.train) cfg.counts.train = *a.train;
    if (a.val) cfg.counts.val = *a.val;
    if (a.test) cfg.counts.test = *a.test;
    cfg.validate();
    const auto splits = generate_corpus(cfg);
    write_corpus(a.out, cfg, splits);
    for (const auto& s : splits) {
        std::cerr << s.name << ": " << s.sets.size() << " sets, " << s.questions.size() << " questions\n";
        for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
    }
    return 0;
}

struct SimulateArgs {
    std::string sets, gt, set_id, counterfactual, out;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
    require_file(a.sets, "sets file");
    require_file(a.gt, "ground-truth file");
    const Json j = read_config(g.config);
    const SimConfig sim = j.contains("sim") ? sim_config_from_json(j.at("sim")) : SimConfig{};
    sim.validate();
    std::optional<std::pair<std::size_t, Condition>> edit;
    if (!a.counterfactual.empty()) {
        const auto eq = a.counterfactual.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Config, "--counterfactual expects OBJ=COND");
        const auto cond = parse_condition(a.counterfactual.substr(eq + 1));
        if (!cond) throw Error(ErrorKind::Config, "unknown condition '" + a.counterfactual.substr(eq + 1) + "'");
        std::size_t obj = 0;
        try {
            obj = std::stoul(a.counterfactual.substr(0, eq));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, "--counterfactual object must be a roster index");
        }
        edit = {obj, *cond};
    }
    const LoadedSplit split = load_split(a.sets, a.gt);
    if (split.sets.empty()) throw Error(ErrorKind::Data, a.sets + " holds no sets");
    std::size_t index = 0;
    if (!a.set_id.empty()) {
        while (index < split.sets.size() && split.sets[index].observed.set_id != a.set_id) ++index;
        if (index == split.sets.size()) throw Error(ErrorKind::Data, "no set with id " + a.set_id);
    }
    const VideoSet set = join(split.sets[index], split.gt[index]);
    PropertyGraph graph = set.truth.graph;
    if (edit) {
        if (edit->first >= graph.size())
            throw Error(ErrorKind::Data, "object " + std::to_string(edit->first) + " is not in the roster");
        graph = with_condition(graph, edit->first, edit->second);
    }
    const int frames = static_cast<int>(set.observed.target.trajectory.frame_count());
    const auto rec = simulate_recorded(set.truth.initial_states.at(0), props_from_graph(graph), sim, frames);
    Json events = Json::array();
    for (const auto& e : observable_events(rec.trajectory, set.observed.target.id)) events.push_back(to_json(e));
    const Json out{{"set_id", set.observed.set_id},
                   {"counterfactual", a.counterfactual},
                   {"graph", to_json(graph)},
                   {"trajectory", to_json(rec.trajectory)},
                   {"events", events}};
    write_text(a.out, out.dump() + '\n');
    return 0;
}

struct RunArgs {
    std::string sets, gt, mode, exec, checkpoint, out;
};

RunConfig run_config(const Globals& g, const RunArgs& a) {
    RunConfig cfg = run_config_from_json(read_config(g.config));
    if (g.seed) cfg.seed = *g.seed;
    if (!a.sets.empty()) cfg.sets = a.sets;
    if (!a.gt.empty()) cfg.gt = a.gt;
    if (!a.checkpoint.empty()) cfg.checkpoint = a.checkpoint;
    if (!a.out.empty()) cfg.out = a.out;
    if (!a.mode.empty()) {
        auto m = parse_pipeline_mode(a.mode);
        if (!m) throw Error(ErrorKind::Config, "unknown mode '" + a.mode + "'");
        cfg.mode = *m;
    }
    if (!a.exec.empty()) {
        if (a.exec != "crisp" && a.exec != "soft") throw Error(ErrorKind::Config, "exec must be crisp or soft");
        cfg.exec = a.exec == "soft" ? ExecMode::Soft : ExecMode::Crisp;
    }
    cfg.validate();
    return cfg;
}

int run_infer(const Globals& g, const RunArgs& a) {
    const RunConfig cfg = run_config(g, a);
    std::optional<Models> models;
    if (cfg.mode == PipelineMode::Learned) models = load_checkpoint(cfg.checkpoint);
    const LoadedSplit split = load_split(cfg.sets);
    std::vector<Json> lines(split.sets.size());
    parallel_for(split.sets.size(), [&](std::size_t i) {
        const auto& set = split.sets[i].observed;
        Json line{{"set_id", set.set_id}};
        try {
            line["graph"] = to_json(infer_graph(set, cfg.mode, models ? &*models : nullptr, cfg.sim));
        } catch (const Error& e) {
            line["error"] = e.what();
        }
        lines[i] = std::move(line);
    });
    std::string text;
    for (const auto& l : lines) text += l.dump() + '\n';
    write_text(cfg.out.string(), text);
    return 0;
}

int run_answer(const Globals& g, const RunArgs& a) {
    const RunConfig cfg = run_config(g, a);
    const auto preds = answer_corpus(cfg);
    if (cfg.out.empty())
        for (const auto& p : preds) std::cout << to_json(p).dump() << '\n';
    std::size_t errors = 0;
    for (const auto& p : preds) errors += p.error.empty() ? 0 : 1;
    std::cerr << preds.size() << " predictions, " << errors << " errors\n";
    return 0;
}

struct EvaluateArgs {
    std::string pred, gt, out, format;
};

int run_evaluate(const Globals& g, const EvaluateArgs& a) {
    require_file(a.pred, "predictions file");
    require_file(a.gt, "ground-truth file");
    const Json j = read_config(g.config);
    const std::string format = !a.format.empty() ? a.format : j.value("report_format", "json");
    if (format != "json" && format != "text") throw Error(ErrorKind::Config, "report format must be json or text");
    Report r = evaluate(read_predictions(a.pred), load_gt_questions(a.gt));
    r.config = {{"pred", a.pred}, {"gt", a.gt}};
    write_text(a.out, format == "json" ? to_json(r).dump(2) + '\n' : report_table(r));
    return 0;
}

struct TrainArgs {
    std::string sets, gt, out, losses;
    std::optional<int> ppi_epochs, dyn_epochs;
};

int run_train(const Globals& g, const TrainArgs& a) {
    require_file(a.sets, "sets file");
    require_file(a.gt, "ground-truth file");
    TrainConfig cfg = train_config_from_json(read_config(g.config));
    if (g.seed) cfg.seed = *g.seed;
    if (a.ppi_epochs) cfg.ppi_epochs = *a.ppi_epochs;
    if (a.dyn_epochs) cfg.dyn_epochs = *a.dyn_epochs;
    const LoadedSplit split = load_split(a.sets, a.gt);
    std::vector<VideoSet> sets;
    std::vector<Question> questions;
    for (std::size_t i = 0; i < split.sets.size(); ++i) {
        sets.push_back(join(split.sets[i], split.gt[i]));
        auto qs = merge_questions(split.sets[i], split.gt[i]);
        questions.insert(questions.end(), qs.begin(), qs.end());
    }
    TrainResult res = train(sets, questions, cfg);
    save_checkpoint(a.out, res.models);
    if (!a.losses.empty()) write_losses_csv(a.losses, res.losses);
    for (const auto& l : res.losses) std::cerr << l.lesson << " epoch " << l.epoch << " loss " << l.loss << '\n';
    return 0;
}

struct BaselineArgs {
    std::string kind, train_gt, sets, out;
};

int run_baseline(const Globals& g, const BaselineArgs& a) {
    const auto kind = parse_baseline(a.kind);
    if (!kind) throw Error(ErrorKind::Config, "baseline must be random or frequent");
    require_file(a.sets, "sets file");
    if (*kind == Baseline::Frequent) require_file(a.train_gt, "training ground-truth file");
    const std::vector<Question> train_gt = a.train_gt.empty() ? std::vector<Question>{} : load_gt_questions(a.train_gt);
    std::vector<Question> eval;
    for (const auto& r : load_split(a.sets).sets) eval.insert(eval.end(), r.questions.begin(), r.questions.end());
    const auto preds = blind_baseline(*kind, train_gt, eval, g.seed.value_or(0));
    if (a.out.empty()) {
        for (const auto& p : preds) std::cout << to_json(p).dump() << '\n';
    } else {
        write_predictions(a.out, preds);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compositional physical reasoning over video sets"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--config", g.config, "JSON configuration file");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate train/val/test splits");
    generate->add_option("--train", gen.train, "Training sets");
    generate->add_option("--val", gen.val, "Validation sets");
    generate->add_option("--test", gen.test, "Test sets");
    generate->add_option("--out", gen.out, "Output directory")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Re-simulate one set's target video");
    simulate->add_option("--sets", sim.sets, "sets.jsonl")->required();
    simulate->add_option("--gt", sim.gt, "gt.jsonl")->required();
    simulate->add_option("--set", sim.set_id, "Set id (default: first)");
    simulate->add_option("--counterfactual", sim.counterfactual, "OBJ=COND, COND in heavier|lighter|uncharged|opposite_charge");
    simulate->add_option("--out", sim.out, "Output JSON (default: stdout)");

    RunArgs inf;
    auto* infer = app.add_subcommand("infer", "Infer property graphs");
    infer->add_option("--sets", inf.sets, "sets.jsonl");
    infer->add_option("--mode", inf.mode, "exact, learned or fit_oracle");
    infer->add_option("--checkpoint", inf.checkpoint, "Model checkpoint (learned mode)");
    infer->add_option("--out", inf.out, "Output JSONL (default: stdout)");

    RunArgs ans;
    auto* answer = app.add_subcommand("answer", "Answer every question of a split");
    answer->add_option("--sets", ans.sets, "sets.jsonl");
    answer->add_option("--mode", ans.mode, "exact, learned or fit_oracle");
    answer->add_option("--exec", ans.exec, "crisp or soft");
    answer->add_option("--checkpoint", ans.checkpoint, "Model checkpoint (learned mode)");
    answer->add_option("--out", ans.out, "Predictions JSONL (default: stdout)");

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions");
    evaluate_cmd->add_option("--pred", ev.pred, "Predictions JSONL")->required();
    evaluate_cmd->add_option("--gt", ev.gt, "gt.jsonl")->required();
    evaluate_cmd->add_option("--out", ev.out, "Report file (default: stdout)");
    evaluate_cmd->add_option("--format", ev.format, "json or text");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train the property and dynamics networks");
    train_cmd->add_option("--sets", tr.sets, "Training sets.jsonl")->required();
    train_cmd->add_option("--gt", tr.gt, "Training gt.jsonl")->required();
    train_cmd->add_option("--out", tr.out, "Checkpoint JSON")->required();
    train_cmd->add_option("--losses", tr.losses, "Loss curve CSV");
    train_cmd->add_option("--ppi-epochs", tr.ppi_epochs, "Property lesson epochs");
    train_cmd->add_option("--dyn-epochs", tr.dyn_epochs, "Dynamics lesson epochs");

    BaselineArgs bl;
    auto* baseline = app.add_subcommand("baseline", "Blind baselines");
    baseline->add_option("--kind", bl.kind, "random or frequent")->required();
    baseline->add_option("--train-gt", bl.train_gt, "Training gt.jsonl (frequent)");
    baseline->add_option("--sets", bl.sets, "Evaluation sets.jsonl")->required();
    baseline->add_option("--out", bl.out, "Predictions JSONL (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*generate) return run_generate(g, gen);
        if (*simulate) return run_simulate(g, sim);
        if (*infer) return run_infer(g, inf);
        if (*answer) return run_answer(g, ans);
        if (*evaluate_cmd) return run_evaluate(g, ev);
        if (*train_cmd) return run_train(g, tr);
        if (*baseline) return run_baseline(g, bl);
    } catch (const Error& e) {
        std::cerr << "comphy: " << e.what() << '\n';
        return e.kind() == ErrorKind::Config ? kUsage : kData;
    } catch (const std::exception& e) {
        std::cerr << "comphy: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
