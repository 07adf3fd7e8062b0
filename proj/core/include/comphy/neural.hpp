#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comphy/executor.hpp"
#include "comphy/propgraph.hpp"
#include "comphy/questions.hpp"
#include "comphy/rng.hpp"
#include "comphy/scene.hpp"

namespace comphy {

using Vec = std::vector<double>;

enum class Activation { Relu, Identity };

struct Dense {
    int in = 0;
    int out = 0;
    Activation act = Activation::Relu;
    Vec w;  // out x in, row-major
    Vec b;
    bool operator==(const Dense&) const = default;
};

class Mlp {
public:
    std::vector<Dense> layers;

    /// dims = {in, hidden..., out}; relu between layers, identity on the last.
    /// Weights uniform in +-1/sqrt(fan_in), biases zero.
    static Mlp create(std::span<const int> dims, Rng& rng);
    static Mlp create(std::initializer_list<int> dims, Rng& rng) {
        return create(std::span<const int>(dims.begin(), dims.size()), rng);
    }

    int in_dim() const { return layers.front().in; }
    int out_dim() const { return layers.back().out; }
    std::size_t parameter_count() const;

    /// Layer inputs and outputs of one forward pass.
    struct Tape {
        std::vector<Vec> values;  // values[0] = x, values[l + 1] = output of layer l
    };

    Vec forward(std::span<const double> x) const;
    Vec forward(std::span<const double> x, Tape& tape) const;
    /// Accumulates parameter gradients into `grad` (same shape) and, when
    /// `dx` is non-empty, the input gradient into `dx`.
    void backward(const Tape& tape, std::span<const double> dy, Mlp& grad, std::span<double> dx = {}) const;

    /// Same shape, all parameters zero.
    Mlp zeros_like() const;
    void fill(double v);
    void add_scaled(const Mlp& other, double scale);
    bool finite() const;

    /// Every parameter, layer by layer, weights before biases.
    std::vector<double*> parameters();
    bool operator==(const Mlp&) const = default;
};

struct NamedMlp {
    std::string name;
    Mlp* mlp;
};

// ---------------------------------------------------------------------------
// Property inference

inline constexpr int kPpiFrames = 50;
inline constexpr int kPpiFrameFeatures = 8;  // x, y, w, h, vx, vy, ax, ay
inline constexpr int kPpiInput = kPpiFrames * kPpiFrameFeatures;
inline constexpr int kGroundConcepts = 3;  // moving, collides, enters or exits

/// Per-object input of one video: kinematics resampled to 50 frames, zeros
/// where the object is outside the frame.
std::vector<Vec> ppi_inputs(const Trajectory& traj);

struct PpiOutput {
    std::vector<std::array<double, 2>> mass;      // logits light, heavy
    std::vector<std::array<double, 3>> relation;  // logits same, opposite, none; upper-triangular pairs
};

struct PpiModel {
    Mlp f_emb;
    Mlp f_rel0;
    Mlp f_rel1;
    Mlp f_enc0;
    Mlp f_enc1;
    Mlp f_v_pred;
    Mlp f_e_pred;
    Mlp f_ground;  // grounding head on v0

    static PpiModel create(Rng& rng, int hidden = 64);
    std::vector<NamedMlp> parts();
    PpiModel zeros_like() const;
    bool operator==(const PpiModel&) const = default;
};

/// Two rounds of message passing over the present objects. `mask[i] == 0` marks a
/// padding slot: its logits are zero and it sends no messages.
PpiOutput ppi_forward(const PpiModel& m, const std::vector<Vec>& inputs, const std::vector<char>& mask);

struct PpiTargets {
    std::vector<int> mass;      // 0 light, 1 heavy, -1 no label
    std::vector<int> relation;  // 0 same, 1 opposite, 2 none, -1 no label
    std::vector<std::array<double, kGroundConcepts>> ground;  // empty: no grounding loss
    double mass_weight = 1.0;
    double relation_weight = 1.0;
    /// Extra facts: (object, heavy?) and objects known to be charged.
    std::vector<std::pair<int, int>> mass_facts;
    std::vector<int> charged_facts;
    double fact_weight = 0.0;
};

/// Mean cross-entropy (plus grounding BCE and fact terms); gradients are
/// accumulated into `grad` when given.
double ppi_loss(const PpiModel& m, const std::vector<Vec>& inputs, const std::vector<char>& mask,
                const PpiTargets& targets, PpiModel* grad);

/// Max-pools per-video logits onto the roster and converts to a scored graph
/// whose labels are the argmax of the pooled logits.
PropertyGraph aggregate_set(std::size_t roster_size, const std::vector<PpiOutput>& per_video,
                            const Alignment& alignment);

/// Most probable labelling with at most one heavy object and zero or two
/// charged objects, scores kept; signs assigned for simulation.
PropertyGraph project_consistent(const PropertyGraph& scored);

/// Alignment, per-video forward passes and aggregation.
PropertyGraph ppi_infer(const PpiModel& m, const ObservedSet& set);

// ---------------------------------------------------------------------------
// Dynamics

inline constexpr int kDynInput = 13;
inline constexpr int kDynPairInput = 2 * kDynInput + 4;
inline constexpr double kDynResidualScale = 100.0;
inline constexpr double kDynContactGap = 0.05;
inline constexpr double kDynVelocityScale = 25.0;  // per-frame differences -> units per second at 25 fps

/// Node input from frames t-2, t-1, t: position, size, the last two
/// position and size differences (times kDynVelocityScale), heavy flag.
Vec dyn_node_input(const std::array<const ObjectState*, 3>& window, bool heavy);

/// Ordered-pair input: the node, its difference to the partner, the
/// inverse-square repulsion direction, the contact gap and the closing speed.
Vec dyn_pair_input(const Vec& node, const Vec& partner);

struct DynModel {
    Mlp g_node;
    std::array<Mlp, 3> g_emb;  // typed raw-pair embedding: same, opposite, none
    Mlp g_rel0;
    Mlp g_rel1;
    std::array<Mlp, 3> g_enc;  // typed edge update on layer-1 nodes
    Mlp g_pred;                // single linear layer

    static DynModel create(Rng& rng, int hidden = 64);
    std::vector<NamedMlp> parts();
    DynModel zeros_like() const;
    bool operator==(const DynModel&) const = default;
};

/// Next (x, y, w, h) per object: constant-velocity extrapolation plus the
/// model's residual. z[edge_index(i, j, n)] is the charge type 0/1/2.
std::vector<std::array<double, 4>> dyn_forward(const DynModel& m, const std::vector<Vec>& nodes,
                                               const std::vector<int>& z, const std::vector<char>& mask);

/// Mean squared residual error (in residual units) against `next`.
double dyn_loss(const DynModel& m, const std::vector<Vec>& nodes, const std::vector<int>& z,
                const std::vector<char>& mask, const std::vector<std::array<double, 4>>& next, DynModel* grad);

/// Charge types of every pair from a labelled graph.
std::vector<int> charge_types(const PropertyGraph& g);

/// Feeds predictions back for `horizon` steps after the three `init` frames;
/// returns only the new frames. Throws RolloutDiverged with the step index.
Trajectory rollout(const DynModel& m, std::span<const std::vector<ObjectState>> init, const PropertyGraph& graph,
                   int horizon, const Rect& bounds = {});

/// Learned counterpart of the exact simulator behind the executor interface.
class LearnedBackend : public DynamicsBackend {
public:
    LearnedBackend(std::shared_ptr<const DynModel> model, Rect bounds = {}) : model_(std::move(model)), bounds_(bounds) {}
    std::string_view name() const override { return "learned"; }
    Trajectory counterfactual(const ExecContext& ctx, const PropertyGraph& graph) const override;
    Trajectory future(const ExecContext& ctx, int horizon) const override;

private:
    std::shared_ptr<const DynModel> model_;
    Rect bounds_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    std::uint64_t seed = 0;
    int hidden = 64;
    double lr = 1e-3;
    double momentum = 0.9;
    int batch = 8;
    int ground_epochs = 2;
    int ppi_epochs = 200;
    int dyn_epochs = 4;
    int window_stride = 3;
    double fact_weight = 0.5;
    double grad_clip = 5.0;
    bool operator==(const TrainConfig&) const = default;
};

struct LossPoint {
    std::string lesson;
    int epoch = 0;
    double loss = 0.0;
};

struct Models {
    PpiModel ppi;
    DynModel dyn;
};

struct TrainResult {
    Models models;
    std::vector<LossPoint> losses;
};

/// Lesson 1 grounds observable concepts, lesson 2 infers properties (plus
/// imagination facts from counterfactual questions), lesson 3 fits dynamics
/// on pseudo-labels from lesson 2. Throws NonFiniteLoss naming lesson,
/// epoch and step.
TrainResult train(const std::vector<VideoSet>& sets, const std::vector<Question>& questions, const TrainConfig& cfg);

struct PpiAccuracy {
    double mass = 0.0;
    double mass_majority = 0.0;
    double charge = 0.0;
    double charge_majority = 0.0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
};

/// Node mass and edge relation accuracy of the aggregated graphs against the
/// truth, with the majority-class rates of the same items.
PpiAccuracy evaluate_ppi(const PpiModel& m, const std::vector<VideoSet>& sets);

struct RolloutError {
    double model = 0.0;
    double constant_velocity = 0.0;
    std::size_t windows = 0;
};

/// Mean position error over `horizon` steps from windows every `stride`
/// frames of each target, with ground-truth properties.
RolloutError evaluate_rollout(const DynModel& m, const std::vector<VideoSet>& sets, int horizon = 25,
                              int stride = 25);

nlohmann::json checkpoint_json(Models& models);
Models models_from_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path, Models& models);
Models load_checkpoint(const std::filesystem::path& path);
void write_losses_csv(const std::filesystem::path& path, const std::vector<LossPoint>& losses);

}  // namespace comphy
