#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comphy/events.hpp"
#include "comphy/physics.hpp"
#include "comphy/property_graph.hpp"
#include "comphy/qlang.hpp"
#include "comphy/scene.hpp"

namespace comphy {

enum class ExecMode { Crisp, Soft };

std::string_view to_string(ExecMode m);

struct ExecContext;

/// Produces the trajectories that counterfactual and predictive operations
/// reason about.
class DynamicsBackend {
public:
    virtual ~DynamicsBackend() = default;
    virtual std::string_view name() const = 0;
    /// The target re-run from its beginning under `graph` (ctx.graph is the
    /// factual world); as many frames as the target.
    virtual Trajectory counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const = 0;
    /// `horizon` frames continuing the target.
    virtual Trajectory future(const ExecContext& ctx, int horizon) const = 0;
};

/// Re-simulates from states recovered from the observed positions.
class ExactBackend : public DynamicsBackend {
public:
    explicit ExactBackend(SimConfig cfg = {}) : cfg_(cfg) {}
    std::string_view name() const override { return "exact"; }
    Trajectory counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const override;
    Trajectory future(const ExecContext& ctx, int horizon) const override;

private:
    SimConfig cfg_;
};

/// Uses the hidden initial state and stored extension; generator only.
class OracleBackend : public DynamicsBackend {
public:
    OracleBackend(std::vector<ObjectState> initial, Trajectory extension, SimConfig cfg = {})
        : initial_(std::move(initial)), extension_(std::move(extension)), cfg_(cfg) {}
    std::string_view name() const override { return "oracle"; }
    Trajectory counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const override;
    Trajectory future(const ExecContext& ctx, int horizon) const override;

private:
    std::vector<ObjectState> initial_;
    Trajectory extension_;
    SimConfig cfg_;
};

struct ExecContext {
    std::vector<StaticAttrs> roster;
    Trajectory target;
    std::vector<Event> events;  // observed target events
    PropertyGraph graph;
    std::shared_ptr<const DynamicsBackend> backend;
    EventParams event_params;
    double moving_threshold = 0.05;
    int horizon = 50;
};

ExecContext make_context(const ObservedSet& set, PropertyGraph graph,
                         std::shared_ptr<const DynamicsBackend> backend);

/// Result of executing a program. Sets carry one score per roster object or
/// per event; crisp execution only produces scores 0 and 1.
struct Value {
    Sort sort = Sort::None;
    std::vector<double> object_scores;
    std::vector<Event> events;
    std::vector<double> event_scores;
    int object = -1;
    double object_score = 1.0;
    double number = 0.0;
    double truth = 0.0;
    std::string token;
};

Value execute(const Program& program, const ExecContext& ctx, ExecMode mode = ExecMode::Crisp);

/// Continues execution of `program` from `input`.
Value execute_from(const Program& program, Value input, const ExecContext& ctx,
                   ExecMode mode = ExecMode::Crisp);

/// Answer string: colors/shapes/materials/heavy/light, yes/no, or a count.
std::string answer_token(const Value& v);

/// Per-choice truth (1/0 crisp, score soft); the question program is run once.
std::vector<double> evaluate_choices(const Program& question, std::span<const Program> choices,
                                     const ExecContext& ctx, ExecMode mode = ExecMode::Crisp);

double evaluate_choice(const Program& question, const Program& choice, const ExecContext& ctx,
                       ExecMode mode = ExecMode::Crisp);

/// Per-object moving flag over the target: speed above the threshold at
/// `frame`, or at any frame the object is visible when frame < 0.
std::vector<bool> moving_objects(const Trajectory& traj, double threshold, int frame = -1);

/// Observable events of `future` frames appended to `past`, re-indexed to
/// absolute frames and restricted to frames >= past.frame_count().
std::vector<Event> future_events(const Trajectory& past, const Trajectory& future,
                                 const EventParams& params = {});

}  // namespace comphy
