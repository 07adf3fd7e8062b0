#include "comphy/events.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "comphy/error.hpp"

namespace comphy {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::In: return "in";
        case EventKind::Out: return "out";
        case EventKind::Collision: return "collision";
        case EventKind::Attraction: return "attraction";
        case EventKind::Repulsion: return "repulsion";
    }
    return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::In, EventKind::Out, EventKind::Collision, EventKind::Attraction,
                   EventKind::Repulsion})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

bool Event::involves(int object) const {
    return std::find(participants.begin(), participants.end(), object) != participants.end();
}

std::vector<Event> detect_in_out(const Trajectory& traj, std::string_view video_id) {
    std::vector<Event> out;
    const std::size_t n = traj.object_count();
    for (std::size_t f = 1; f < traj.frame_count(); ++f) {
        for (std::size_t o = 0; o < n; ++o) {
            const bool before = traj.at(f - 1, o).present;
            const bool now = traj.at(f, o).present;
            if (before == now) continue;
            out.push_back({now ? EventKind::In : EventKind::Out, {static_cast<int>(o)},
                           static_cast<int>(f), std::string(video_id)});
        }
    }
    return out;
}

namespace {

double segment_min_distance(Vec2 start, Vec2 delta) {
    const double len2 = delta.norm2();
    if (len2 == 0.0) return start.norm();
    const double s = std::clamp(-start.dot(delta) / len2, 0.0, 1.0);
    return (start + delta * s).norm();
}

}  // namespace

std::vector<Event> detect_collisions(const Trajectory& traj, std::string_view video_id,
                                     const EventParams& params) {
    std::vector<Event> out;
    const std::size_t n = traj.object_count();
    const std::size_t frames = traj.frame_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            int last_contact = -1000000;
            for (std::size_t t = 2; t < frames; ++t) {
                const auto& a1 = traj.at(t - 1, i);
                const auto& b1 = traj.at(t - 1, j);
                const auto& a0 = traj.at(t, i);
                const auto& b0 = traj.at(t, j);
                if (!(a1.present && b1.present && a0.present && b0.present)) continue;
                const Vec2 prev = b1.position - a1.position;
                const Vec2 prev_rate = prev - (traj.at(t - 2, j).position - traj.at(t - 2, i).position);
                if (prev_rate.dot(prev) >= 0.0) continue;  // not approaching at t-1
                const double reach = a0.radius + b0.radius + params.contact_eps;
                const Vec2 now = b0.position - a0.position;
                const bool contact =
                    now.norm() <= reach || segment_min_distance(prev, prev_rate) <= reach;
                if (!contact) continue;
                const int frame = static_cast<int>(t);
                if (frame - last_contact - 1 >= params.episode_gap)
                    out.push_back({EventKind::Collision, {static_cast<int>(i), static_cast<int>(j)},
                                   frame, std::string(video_id)});
                last_contact = frame;
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Event& x, const Event& y) { return x.frame < y.frame; });
    return out;
}

std::vector<Event> annotate_charge_events(const Trajectory& traj, const PropertyGraph& props,
                                          std::string_view video_id, const EventParams& params) {
    if (!props.signs) throw Error(ErrorKind::Data, "charge annotation requires absolute charges");
    const auto& signs = *props.signs;
    std::vector<Event> out;
    const std::size_t n = traj.object_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int product = signs[i] * signs[j];
            if (product == 0) continue;
            for (std::size_t t = 0; t < traj.frame_count(); ++t) {
                const auto& a = traj.at(t, i);
                const auto& b = traj.at(t, j);
                if (!(a.present && b.present)) continue;
                if ((a.position - b.position).norm() < params.interaction_radius) {
                    out.push_back({product < 0 ? EventKind::Attraction : EventKind::Repulsion,
                                   {static_cast<int>(i), static_cast<int>(j)}, static_cast<int>(t),
                                   std::string(video_id)});
                    break;
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Event& x, const Event& y) { return x.frame < y.frame; });
    return out;
}

std::vector<Interaction> detect_interactions_kinematic(const Trajectory& traj,
                                                       const EventParams& params) {
    std::vector<Interaction> out;
    const std::size_t n = traj.object_count();
    const std::size_t frames = traj.frame_count();
    if (frames < 3 || n < 2) return out;
    const double fps = traj.fps;

    // near[o][t]: object o is within guard distance of any other object
    // somewhere in frames [t-2, t+2].
    std::vector<std::vector<char>> close(n, std::vector<char>(frames, 0));
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto& a = traj.at(t, i);
                const auto& b = traj.at(t, j);
                if ((a.position - b.position).norm() <= a.radius + b.radius + params.contact_guard)
                    close[i][t] = close[j][t] = 1;
            }
    std::vector<std::vector<char>> near(n, std::vector<char>(frames, 0));
    for (std::size_t o = 0; o < n; ++o)
        for (std::size_t t = 0; t < frames; ++t) {
            const std::size_t lo = t >= 2 ? t - 2 : 0;
            const std::size_t hi = std::min(frames - 1, t + 2);
            for (std::size_t s = lo; s <= hi; ++s)
                if (close[o][s]) near[o][t] = 1;
        }

    auto residual_accel = [&](std::size_t t, std::size_t o) {
        const Vec2 prev = traj.at(t - 1, o).position;
        const Vec2 cur = traj.at(t, o).position;
        const Vec2 next = traj.at(t + 1, o).position;
        const Vec2 accel = (next - cur * 2.0 + prev) * (fps * fps);
        const Vec2 vel = (next - prev) * (fps / 2.0);
        return accel + vel * params.damping;
    };
    auto usable = [&](std::size_t t, std::size_t o) {
        return traj.at(t - 1, o).present && traj.at(t, o).present && traj.at(t + 1, o).present &&
               !near[o][t];
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            int run_class = 0;  // +1 attract, -1 repel
            std::size_t run_start = 0;
            int run_len = 0;
            double run_strength = 0.0;
            auto flush = [&] {
                if (run_class != 0 && run_len >= params.min_run) {
                    const double mean = run_strength / run_len / params.accel_threshold;
                    out.push_back({static_cast<int>(i), static_cast<int>(j),
                                   run_class > 0 ? Polarity::Attract : Polarity::Repel,
                                   static_cast<int>(run_start), std::clamp(mean, 0.0, 1.0)});
                }
                run_class = 0;
                run_len = 0;
                run_strength = 0.0;
            };
            for (std::size_t t = 1; t + 1 < frames; ++t) {
                int cls = 0;
                double strength = 0.0;
                if (usable(t, i) && usable(t, j)) {
                    const Vec2 sep = traj.at(t, j).position - traj.at(t, i).position;
                    const double dist = sep.norm();
                    if (dist > 0.0) {
                        const Vec2 u = sep / dist;
                        const double toward_i = residual_accel(t, i).dot(u);
                        const double toward_j = -residual_accel(t, j).dot(u);
                        const double thr = params.accel_threshold;
                        if (toward_i > thr && toward_j > thr) cls = 1;
                        else if (toward_i < -thr && toward_j < -thr) cls = -1;
                        strength = std::min(std::abs(toward_i), std::abs(toward_j));
                    }
                }
                if (cls != run_class) {
                    flush();
                    if (cls != 0) {
                        run_class = cls;
                        run_start = t;
                    }
                }
                if (cls != 0) {
                    ++run_len;
                    run_strength += strength;
                }
            }
            flush();
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Interaction& x, const Interaction& y) {
        return std::tie(x.frame, x.a, x.b) < std::tie(y.frame, y.a, y.b);
    });
    return out;
}

std::vector<Event> observable_events(const Trajectory& traj, std::string_view video_id,
                                     const EventParams& params) {
    std::vector<Event> events = detect_collisions(traj, video_id, params);
    std::vector<Event> io = detect_in_out(traj, video_id);
    events.insert(events.end(), io.begin(), io.end());
    std::stable_sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
        return std::tie(x.frame, x.kind, x.participants) < std::tie(y.frame, y.kind, y.participants);
    });
    return events;
}

Vec2 estimate_velocity(const Trajectory& traj, std::size_t frame, std::size_t object) {
    const std::size_t frames = traj.frame_count();
    if (frames < 2) return {};
    if (frame == 0) return (traj.at(1, object).position - traj.at(0, object).position) * traj.fps;
    if (frame + 1 >= frames)
        return (traj.at(frames - 1, object).position - traj.at(frames - 2, object).position) * traj.fps;
    return (traj.at(frame + 1, object).position - traj.at(frame - 1, object).position) *
           (traj.fps / 2.0);
}

}  // namespace comphy
