#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "comphy/genset.hpp"
#include "comphy/questions.hpp"
#include "comphy/serialization.hpp"

namespace comphy {

struct Split {
    std::string name;
    std::vector<VideoSet> sets;
    std::vector<Question> questions;  // balanced, grouped by set in set order
    std::vector<std::string> warnings;
};

/// Sets `first .. first + count` of the global index space. Every set draws
/// from its own stream derive_seed(seed, index), so the result is independent
/// of the thread count.
Split generate_split(const GenConfig& cfg, const QuestionConfig& qcfg, const std::string& name, int first,
                     int count);

/// train, val and test with the configured counts.
std::vector<Split> generate_corpus(const GenConfig& cfg, const QuestionConfig& qcfg = {});

/// DIR/config.json and DIR/<split>/{sets,gt}.jsonl.
void write_corpus(const std::filesystem::path& dir, const GenConfig& cfg, const std::vector<Split>& splits);

struct LoadedSplit {
    std::vector<SetRecord> sets;
    std::vector<GtRecord> gt;  // empty when no gt file was given
};

LoadedSplit load_split(const std::filesystem::path& sets_file, const std::filesystem::path& gt_file = {});

/// Full set (observable record plus truth) from a loaded split.
VideoSet join(const SetRecord& observed, const GtRecord& gt);

}  // namespace comphy
