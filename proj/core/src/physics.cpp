#include "comphy/physics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "comphy/error.hpp"

namespace comphy {

int SimConfig::steps_per_frame() const {
    return static_cast<int>(std::lround(1.0 / (dt * record_fps)));
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
    if (!(record_fps > 0.0)) throw Error(ErrorKind::Config, "record_fps must be positive");
    const double ratio = 1.0 / (dt * record_fps);
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        throw Error(ErrorKind::Config, "record_fps must divide 1/dt evenly (ratio " +
                                           std::to_string(ratio) + ")");
    if (!(softening_min_dist > 0.0))
        throw Error(ErrorKind::Config, "softening_min_dist must be positive");
    if (!(restitution > 0.0 && restitution <= 1.0))
        throw Error(ErrorKind::Config, "restitution must lie in (0, 1]");
    if (damping < 0.0) throw Error(ErrorKind::Config, "damping must be non-negative");
    if (!(world_bounds.x_max > world_bounds.x_min && world_bounds.y_max > world_bounds.y_min))
        throw Error(ErrorKind::Config, "world_bounds is empty");
}

Vec2 pair_force(const ObjectState& a, const ObjectState& b, const PhysProps& pa,
                const PhysProps& pb, const SimConfig& cfg) {
    const int product = pa.charge * pb.charge;
    if (product == 0) return {};
    const Vec2 sep = a.position - b.position;
    const double dist = sep.norm();
    double clamp = dist;
    if (cfg.softening_min_dist > 0.0) {
        clamp = std::max({dist, cfg.softening_min_dist, a.radius + b.radius});
    } else if (dist == 0.0) {
        throw Error(ErrorKind::SingularSeparation, "coincident charged objects");
    }
    if (dist == 0.0) return {};  // softened, direction undefined
    const double magnitude = cfg.coulomb_k * std::abs(product) / (clamp * clamp);
    const double sign = product > 0 ? 1.0 : -1.0;  // + pushes a away from b
    return sep * (sign * magnitude / dist);
}

std::vector<Vec2> compute_forces(std::span<const ObjectState> states,
                                 std::span<const PhysProps> props, const SimConfig& cfg) {
    const std::size_t n = states.size();
    std::vector<Vec2> forces(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 f = pair_force(states[i], states[j], props[i], props[j], cfg);
            forces[i] += f;
            forces[j] -= f;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        forces[i] -= states[i].velocity * (cfg.damping * props[i].mass);
    return forces;
}

namespace {

std::vector<ObjectState> resolve_impl(std::span<const ObjectState> states,
                                      std::span<const PhysProps> props, const SimConfig& cfg,
                                      std::vector<std::pair<int, int>>* impulses) {
    std::vector<ObjectState> out(states.begin(), states.end());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ObjectState& a = out[i];
            ObjectState& b = out[j];
            const Vec2 sep = b.position - a.position;
            const double reach = a.radius + b.radius;
            const double d2 = sep.norm2();
            if (d2 >= reach * reach) continue;
            const double dist = std::sqrt(d2);
            const Vec2 normal = dist > 0.0 ? sep / dist : Vec2{1.0, 0.0};
            const double inv_a = 1.0 / props[i].mass;
            const double inv_b = 1.0 / props[j].mass;
            const double approach = (b.velocity - a.velocity).dot(normal);
            if (approach < 0.0) {
                const double impulse = -(1.0 + cfg.restitution) * approach / (inv_a + inv_b);
                a.velocity -= normal * (impulse * inv_a);
                b.velocity += normal * (impulse * inv_b);
                if (impulses) impulses->emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
            const double depth = reach - dist;
            const double share_a = inv_a / (inv_a + inv_b);
            a.position -= normal * (depth * share_a);
            b.position += normal * (depth * (1.0 - share_a));
        }
    }
    return out;
}

}  // namespace

std::vector<ObjectState> resolve_collisions(std::span<const ObjectState> states,
                                            std::span<const PhysProps> props,
                                            const SimConfig& cfg) {
    return resolve_impl(states, props, cfg, nullptr);
}

std::vector<ObjectState> resolve_collisions(std::span<const ObjectState> states,
                                            std::span<const PhysProps> props,
                                            const SimConfig& cfg,
                                            std::vector<std::pair<int, int>>& impulses) {
    return resolve_impl(states, props, cfg, &impulses);
}

bool inside_frame(const ObjectState& s, const Rect& b) {
    return s.position.x > b.x_min - s.radius && s.position.x < b.x_max + s.radius &&
           s.position.y > b.y_min - s.radius && s.position.y < b.y_max + s.radius;
}

namespace {

std::vector<ObjectState> step_impl(std::span<const ObjectState> states,
                                   std::span<const PhysProps> props, const SimConfig& cfg,
                                   std::vector<std::pair<int, int>>* impulses) {
    const std::vector<Vec2> forces = compute_forces(states, props, cfg);
    std::vector<ObjectState> next(states.begin(), states.end());
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i].velocity += forces[i] * (cfg.dt / props[i].mass);
        next[i].position += next[i].velocity * cfg.dt;
    }
    next = resolve_impl(next, props, cfg, impulses);
    for (auto& s : next) s.present = inside_frame(s, cfg.world_bounds);
    return next;
}

}  // namespace

std::vector<ObjectState> step(std::span<const ObjectState> states,
                              std::span<const PhysProps> props, const SimConfig& cfg) {
    return step_impl(states, props, cfg, nullptr);
}

SimulationRecord simulate_recorded(std::span<const ObjectState> initial,
                                   std::span<const PhysProps> props, const SimConfig& cfg,
                                   int frames) {
    SimulationRecord rec;
    rec.trajectory.fps = cfg.record_fps;
    if (frames <= 0) return rec;
    const int spf = cfg.steps_per_frame();
    std::vector<ObjectState> state(initial.begin(), initial.end());
    for (auto& s : state) s.present = inside_frame(s, cfg.world_bounds);
    rec.trajectory.frames.reserve(static_cast<std::size_t>(frames));
    rec.trajectory.frames.push_back(state);
    std::vector<std::pair<int, int>> impulses;
    for (int f = 1; f < frames; ++f) {
        for (int s = 0; s < spf; ++s) {
            impulses.clear();
            state = step_impl(state, props, cfg, &impulses);
            for (auto [a, b] : impulses) rec.contacts.push_back({f, a, b});
        }
        rec.trajectory.frames.push_back(state);
    }
    return rec;
}

Trajectory simulate(std::span<const ObjectState> initial, std::span<const PhysProps> props,
                    const SimConfig& cfg, double duration) {
    if (!(duration > 0.0)) throw Error(ErrorKind::Config, "duration must be positive");
    const int frames = static_cast<int>(std::lround(duration * cfg.record_fps));
    return simulate_recorded(initial, props, cfg, frames).trajectory;
}

std::vector<ObjectState> reconstruct_state(const Trajectory& traj, std::size_t frame,
                                           std::span<const PhysProps> props,
                                           const SimConfig& cfg) {
    if (frame + 1 >= traj.frame_count())
        throw Error(ErrorKind::Data, "state reconstruction needs two consecutive frames");
    const std::size_t n = traj.object_count();
    const int spf = cfg.steps_per_frame();
    const double frame_dt = spf * cfg.dt;
    std::vector<ObjectState> guess(traj.frames[frame]);
    const auto& next_frame = traj.frames[frame + 1];
    for (std::size_t i = 0; i < n; ++i)
        guess[i].velocity = (next_frame[i].position - guess[i].position) / frame_dt;

    double last_residual = INFINITY;
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<ObjectState> probe = guess;
        for (int s = 0; s < spf; ++s) probe = step(probe, props, cfg);
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 err = next_frame[i].position - probe[i].position;
            residual = std::max({residual, std::abs(err.x), std::abs(err.y)});
            guess[i].velocity += err / frame_dt;
        }
        if (residual == 0.0 || residual >= last_residual) break;
        last_residual = residual;
    }
    return guess;
}

double kinetic_energy(std::span<const ObjectState> states, std::span<const PhysProps> props) {
    double e = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i)
        e += 0.5 * props[i].mass * states[i].velocity.norm2();
    return e;
}

Vec2 momentum(std::span<const ObjectState> states, std::span<const PhysProps> props) {
    Vec2 p;
    for (std::size_t i = 0; i < states.size(); ++i) p += states[i].velocity * props[i].mass;
    return p;
}

}  // namespace comphy
