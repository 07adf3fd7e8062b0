#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "comphy/executor.hpp"
#include "comphy/genset.hpp"
#include "comphy/qlang.hpp"
#include "comphy/rng.hpp"

namespace comphy {

enum class QuestionKind { Factual, Counterfactual, Predictive };

std::string_view to_string(QuestionKind k);
std::optional<QuestionKind> parse_question_kind(std::string_view s);

struct Choice {
    std::string text;
    Program program;
    bool correct = false;
    bool operator==(const Choice&) const = default;
};

struct Question {
    std::string qid;
    std::string set_id;
    QuestionKind kind = QuestionKind::Factual;
    std::string family;
    std::string text;
    Program program;
    std::vector<Choice> choices;  // multiple-choice kinds only
    std::string answer;           // factual only
    bool operator==(const Question&) const = default;
};

/// Template family of a program: query_color, query_shape, query_material,
/// query_mass, query_charged, charge_relation, count, exist, count_relation,
/// event_exist, counterfact_<condition>, predictive.
std::string question_family(const Program& program);

/// Factual answer vocabulary of a family.
std::vector<std::string> answer_space(std::string_view family);

struct QuestionConfig {
    int factual_per_family = 2;     // instantiation tries per family
    int variants_per_condition = 2;  // choice subsets per (object, condition)
    int predictive_variants = 2;
    double p_property_descriptor = 0.4;
    bool operator==(const QuestionConfig&) const = default;
};

/// Ground-truth execution context: hidden graph with the exact back-end.
ExecContext truth_context(const VideoSet& set, const SimConfig& sim = {});

/// Every question the templates yield for the set: answers and labels are
/// computed on the ground-truth context, choice labels are cross-checked
/// against rollouts from the hidden initial state (disagreeing choices are
/// dropped), and uninformative questions are skipped.
std::vector<Question> instantiate(const VideoSet& set, Rng& rng, const QuestionConfig& qcfg = {},
                                  const SimConfig& sim = {});

/// Collision choices for "what if `object` were `c`"; empty when the
/// condition is not counter-to-fact or no mixed choice set exists.
std::vector<Choice> make_counterfactual_choices(const VideoSet& set, int object, Condition c,
                                                Rng& rng, const SimConfig& sim = {});

/// Collision choices for the two seconds after the target.
std::vector<Choice> make_predictive_choices(const VideoSet& set, Rng& rng, const SimConfig& sim = {});

struct KindRatios {
    double factual = 0.42;
    double counterfactual = 0.50;
    double predictive = 0.08;
};

struct BalanceResult {
    std::vector<Question> questions;
    std::vector<std::string> warnings;
};

/// Caps every factual answer at half of its family, then subsamples kinds to
/// the target ratios. Output keeps the pool order.
BalanceResult balance(const std::vector<Question>& pool, Rng& rng, const KindRatios& ratios = {});

struct Constraint {
    Program program;
    bool expected = true;
    bool operator==(const Constraint&) const = default;
};

/// Presuppositions of a counterfactual question: the referenced object exists
/// and does not already have the hypothesised property.
std::vector<Constraint> extract_imagination_constraints(const Question& q);

/// Shortest-first unique descriptors (filter ops) of `object` over the
/// static attributes, optionally with one property adjective.
std::vector<Program> unique_descriptors(const ExecContext& ctx, int object, bool with_properties);

}  // namespace comphy
