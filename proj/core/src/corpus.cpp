#include "comphy/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "comphy/error.hpp"
#include "comphy/parallel.hpp"

namespace comphy {

namespace {

constexpr std::uint64_t kQuestionStream = 1;
constexpr std::uint64_t kBalanceStream = 0x62616c616e6365ULL;

std::string set_name(const std::string& split, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%05d", split.c_str(), index);
    return buf;
}

}  // namespace

Split generate_split(const GenConfig& cfg, const QuestionConfig& qcfg, const std::string& name, int first,
                     int count) {
    cfg.validate();
    Split split;
    split.name = name;
    split.sets.resize(static_cast<std::size_t>(count));
    std::vector<std::vector<Question>> pools(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        const auto global = static_cast<std::uint64_t>(first) + i;
        Rng rng(derive_seed(cfg.seed, global));
        split.sets[i] = generate_set(rng, cfg, set_name(name, static_cast<int>(i)));
        Rng qrng(derive_seed(derive_seed(cfg.seed, global), kQuestionStream));
        pools[i] = instantiate(split.sets[i], qrng, qcfg, cfg.sim);
    });
    std::vector<Question> pool;
    for (auto& p : pools) pool.insert(pool.end(), p.begin(), p.end());
    Rng brng(derive_seed(cfg.seed ^ kBalanceStream, static_cast<std::uint64_t>(first)));
    auto balanced = balance(pool, brng);
    split.questions = std::move(balanced.questions);
    split.warnings = std::move(balanced.warnings);
    return split;
}

std::vector<Split> generate_corpus(const GenConfig& cfg, const QuestionConfig& qcfg) {
    std::vector<Split> out;
    int first = 0;
    for (auto [name, count] : {std::pair{"train", cfg.counts.train}, std::pair{"val", cfg.counts.val},
                               std::pair{"test", cfg.counts.test}}) {
        out.push_back(generate_split(cfg, qcfg, name, first, count));
        first += count;
    }
    return out;
}

void write_corpus(const std::filesystem::path& dir, const GenConfig& cfg, const std::vector<Split>& splits) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "config.json", std::ios::binary);
        if (!out) throw Error(ErrorKind::Data, "cannot write " + (dir / "config.json").string());
        out << to_json(cfg).dump(2) << '\n';
    }
    for (const Split& split : splits) {
        std::map<std::string, std::vector<Question>> by_set;
        for (const auto& q : split.questions) by_set[q.set_id].push_back(q);
        std::vector<Json> sets;
        std::vector<Json> gt;
        for (const auto& s : split.sets) {
            const auto& qs = by_set[s.observed.set_id];
            sets.push_back(observed_line(s.observed, qs));
            gt.push_back(truth_line(s.observed.set_id, s.truth, qs));
        }
        write_jsonl(dir / split.name / "sets.jsonl", sets);
        write_jsonl(dir / split.name / "gt.jsonl", gt);
    }
}

LoadedSplit load_split(const std::filesystem::path& sets_file, const std::filesystem::path& gt_file) {
    LoadedSplit out;
    for (const auto& j : read_jsonl(sets_file)) {
        try {
            out.sets.push_back(observed_from_line(j));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Data, sets_file.string() + ": " + e.what());
        }
    }
    if (gt_file.empty()) return out;
    for (const auto& j : read_jsonl(gt_file)) {
        try {
            out.gt.push_back(truth_from_line(j));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Data, gt_file.string() + ": " + e.what());
        }
    }
    if (out.gt.size() != out.sets.size())
        throw Error(ErrorKind::Data, "sets and ground truth differ in length");
    for (std::size_t i = 0; i < out.sets.size(); ++i)
        if (out.sets[i].observed.set_id != out.gt[i].set_id)
            throw Error(ErrorKind::Data, "set id mismatch at line " + std::to_string(i + 1));
    return out;
}

VideoSet join(const SetRecord& observed, const GtRecord& gt) {
    return VideoSet{observed.observed, gt.truth};
}

}  // namespace comphy
