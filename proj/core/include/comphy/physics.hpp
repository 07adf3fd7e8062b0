#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace comphy {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 1.0;
    double y_max = 1.0;
    constexpr bool operator==(const Rect&) const = default;
};

struct ObjectState {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.04;
    bool present = true;
    constexpr bool operator==(const ObjectState&) const = default;
};

inline constexpr double kLightMass = 1.0;
inline constexpr double kHeavyMass = 5.0;

struct PhysProps {
    double mass = kLightMass;
    int charge = 0;  // -1, 0 or +1
    constexpr bool operator==(const PhysProps&) const = default;
};

struct SimConfig {
    double dt = 1.0 / 125.0;
    double record_fps = 25.0;
    double coulomb_k = 0.02;
    double damping = 0.1;
    double restitution = 1.0;
    /// Lower clamp of the Coulomb separation; the clamp is also never below
    /// the sum of the two radii. Zero disables softening altogether.
    double softening_min_dist = 0.05;
    Rect world_bounds;

    constexpr bool operator==(const SimConfig&) const = default;

    /// Integrator steps between two recorded frames.
    int steps_per_frame() const;
    /// Throws Error(Config) when an invariant is violated.
    void validate() const;
};

/// Recorded samples, frames-major: frames[f][object]. Velocity is carried for
/// simulator output only; trajectories loaded from the observable record
/// have zero velocities.
struct Trajectory {
    double fps = 25.0;
    std::vector<std::vector<ObjectState>> frames;

    std::size_t frame_count() const { return frames.size(); }
    std::size_t object_count() const { return frames.empty() ? 0 : frames.front().size(); }
    const ObjectState& at(std::size_t frame, std::size_t object) const { return frames[frame][object]; }
    bool operator==(const Trajectory&) const = default;
};

struct Contact {
    int frame;  // first recorded frame at or after the impulse
    int a;
    int b;
    bool operator==(const Contact&) const = default;
};

struct SimulationRecord {
    Trajectory trajectory;
    std::vector<Contact> contacts;
};

/// Pairwise Coulomb forces plus linear damping (-damping * mass * velocity).
std::vector<Vec2> compute_forces(std::span<const ObjectState> states,
                                 std::span<const PhysProps> props,
                                 const SimConfig& cfg);

/// Force on object a from object b (Coulomb term only); the force on b is the
/// exact negation.
Vec2 pair_force(const ObjectState& a, const ObjectState& b, const PhysProps& pa,
                const PhysProps& pb, const SimConfig& cfg);

/// Elastic impulse along the contact normal for every overlapping,
/// approaching pair, followed by mass-weighted positional separation.
std::vector<ObjectState> resolve_collisions(std::span<const ObjectState> states,
                                            std::span<const PhysProps> props,
                                            const SimConfig& cfg);

/// Same as resolve_collisions, appending the index pairs that received an
/// impulse to `impulses`.
std::vector<ObjectState> resolve_collisions(std::span<const ObjectState> states,
                                            std::span<const PhysProps> props,
                                            const SimConfig& cfg,
                                            std::vector<std::pair<int, int>>& impulses);

bool inside_frame(const ObjectState& s, const Rect& bounds);

/// One semi-implicit Euler step: v += F/m dt, x += v dt, contacts, presence.
std::vector<ObjectState> step(std::span<const ObjectState> states,
                              std::span<const PhysProps> props, const SimConfig& cfg);

/// round(duration * record_fps) frames; frame 0 is the initial state.
Trajectory simulate(std::span<const ObjectState> initial, std::span<const PhysProps> props,
                    const SimConfig& cfg, double duration);

SimulationRecord simulate_recorded(std::span<const ObjectState> initial,
                                   std::span<const PhysProps> props, const SimConfig& cfg,
                                   int frames);

/// Recovers the full state at `frame` from recorded positions at `frame` and
/// `frame + 1` by inverting the integrator: the initial velocity guess is the
/// finite difference, refined by fixed-point iteration until re-simulating one
/// frame reproduces the next recorded positions.
std::vector<ObjectState> reconstruct_state(const Trajectory& traj, std::size_t frame,
                                           std::span<const PhysProps> props,
                                           const SimConfig& cfg);

double kinetic_energy(std::span<const ObjectState> states, std::span<const PhysProps> props);
Vec2 momentum(std::span<const ObjectState> states, std::span<const PhysProps> props);

}  // namespace comphy
