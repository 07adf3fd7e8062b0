#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "comphy/error.hpp"
#include "comphy/neural.hpp"
#include "comphy/parallel.hpp"

namespace comphy {

namespace {

struct PpiExample {
    std::vector<Vec> inputs;
    PpiTargets targets;
};

struct DynExample {
    std::vector<Vec> nodes;
    std::vector<int> z;
    std::vector<std::array<double, 4>> next;
};

template <typename Model>
void add_model(Model& acc, Model& g, double scale) {
    auto a = acc.parts();
    auto b = g.parts();
    for (std::size_t i = 0; i < a.size(); ++i) a[i].mlp->add_scaled(*b[i].mlp, scale);
}

template <typename Model>
double squared_norm(Model& m) {
    double s = 0.0;
    for (auto& p : m.parts())
        for (const auto& d : p.mlp->layers) {
            for (double w : d.w) s += w * w;
            for (double b : d.b) s += b * b;
        }
    return s;
}

template <typename Model>
bool model_finite(Model& m) {
    for (auto& p : m.parts())
        if (!p.mlp->finite()) return false;
    return true;
}

/// Mini-batch SGD with momentum; per-example gradients are computed in
/// parallel and reduced in example order.
template <typename Model, typename Example, typename LossFn>
void run_lesson(Model& model, const std::vector<Example>& examples, int epochs, const TrainConfig& cfg, Rng& rng,
                const std::string& lesson, LossFn loss_fn, std::vector<LossPoint>& curve,
                const std::function<void(int)>& after_epoch = {}) {
    if (examples.empty() || epochs <= 0) return;
    Model velocity = model.zeros_like();
    Model total = model.zeros_like();
    const std::size_t batch = static_cast<std::size_t>(std::max(cfg.batch, 1));
    std::vector<Model> grads(batch, model.zeros_like());
    std::vector<double> losses(batch);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t step = 0;
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch, ++step) {
            const std::size_t count = std::min(batch, order.size() - start);
            parallel_for(count, [&](std::size_t k) {
                for (auto& p : grads[k].parts()) p.mlp->fill(0.0);
                losses[k] = loss_fn(model, examples[order[start + k]], &grads[k]);
            });
            for (auto& p : total.parts()) p.mlp->fill(0.0);
            double batch_loss = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                batch_loss += losses[k];
                add_model(total, grads[k], 1.0 / static_cast<double>(count));
            }
            if (!std::isfinite(batch_loss) || !model_finite(total))
                throw Error(ErrorKind::NonFiniteLoss, "lesson " + lesson + ", epoch " + std::to_string(epoch) +
                                                          ", step " + std::to_string(step));
            epoch_loss += batch_loss;
            const double norm = std::sqrt(squared_norm(total));
            const double clip = cfg.grad_clip > 0.0 && norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
            auto vp = velocity.parts();
            auto tp = total.parts();
            auto mp = model.parts();
            for (std::size_t i = 0; i < vp.size(); ++i) {
                for (auto& d : vp[i].mlp->layers) {
                    for (double& w : d.w) w *= cfg.momentum;
                    for (double& b : d.b) b *= cfg.momentum;
                }
                vp[i].mlp->add_scaled(*tp[i].mlp, -cfg.lr * clip);
                mp[i].mlp->add_scaled(*vp[i].mlp, 1.0);
            }
        }
        curve.push_back({lesson, epoch, epoch_loss / static_cast<double>(order.size())});
        if (after_epoch) after_epoch(epoch);
    }
}

int relation_class(Relation r) {
    switch (r) {
        case Relation::Same: return 0;
        case Relation::Opposite: return 1;
        case Relation::None: return 2;
        default: return -1;
    }
}

std::vector<int> roster_ids(const VideoSet& set, std::size_t video) {
    if (video == 0) {
        std::vector<int> ids(set.observed.roster().size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        return ids;
    }
    return set.truth.alignment.at(video - 1);
}

const Video& video_at(const ObservedSet& s, std::size_t v) { return v == 0 ? s.target : s.references.at(v - 1); }

std::vector<std::array<double, kGroundConcepts>> ground_labels(const Video& v) {
    const std::size_t n = v.objects.size();
    std::vector<std::array<double, kGroundConcepts>> out(n, {0.0, 0.0, 0.0});
    const auto moving = moving_objects(v.trajectory, 0.05);
    for (std::size_t i = 0; i < n; ++i) out[i][0] = moving[i] ? 1.0 : 0.0;
    for (const Event& e : v.events)
        for (int p : e.participants) {
            auto& o = out[static_cast<std::size_t>(p)];
            if (e.kind == EventKind::Collision) o[1] = 1.0;
            if (e.kind == EventKind::In || e.kind == EventKind::Out) o[2] = 1.0;
        }
    return out;
}

struct Facts {
    std::vector<std::pair<int, int>> mass;
    std::vector<int> charged;
};

Facts imagination_facts(const VideoSet& set, const std::vector<const Question*>& questions) {
    Facts f;
    if (questions.empty()) return f;
    const ExecContext ctx = truth_context(set);
    for (const Question* q : questions) {
        const auto constraints = extract_imagination_constraints(*q);
        if (constraints.empty()) continue;
        const Program ref(q->program.begin(), q->program.end() - 1);
        int object = -1;
        try {
            object = execute(ref, ctx).object;
        } catch (const Error&) {
            continue;
        }
        if (object < 0) continue;
        switch (q->program.back().code) {
            case Opcode::CounterfactHeavier: f.mass.emplace_back(object, 0); break;
            case Opcode::CounterfactLighter: f.mass.emplace_back(object, 1); break;
            default: f.charged.push_back(object); break;
        }
    }
    return f;
}

std::vector<PpiExample> ppi_examples(const std::vector<VideoSet>& sets, const std::vector<Question>& questions,
                                     double fact_weight, bool properties) {
    std::map<std::string, std::vector<const Question*>> by_set;
    for (const auto& q : questions)
        if (q.kind == QuestionKind::Counterfactual) by_set[q.set_id].push_back(&q);
    std::vector<std::vector<PpiExample>> per_set(sets.size());
    parallel_for(sets.size(), [&](std::size_t s) {
        const VideoSet& set = sets[s];
        const Facts facts = properties ? imagination_facts(set, by_set[set.observed.set_id]) : Facts{};
        for (std::size_t v = 0; v <= set.observed.references.size(); ++v) {
            const Video& video = video_at(set.observed, v);
            const auto ids = roster_ids(set, v);
            const std::size_t n = ids.size();
            PpiExample ex;
            ex.inputs = ppi_inputs(video.trajectory);
            ex.targets.ground = ground_labels(video);
            if (properties) {
                for (int r : ids)
                    ex.targets.mass.push_back(set.truth.graph.mass[static_cast<std::size_t>(r)] == MassLabel::Heavy ? 1 : 0);
                ex.targets.relation.assign(edge_count(n), -1);
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = a + 1; b < n; ++b)
                        ex.targets.relation[edge_index(a, b, n)] = relation_class(set.truth.graph.relation(
                            static_cast<std::size_t>(ids[a]), static_cast<std::size_t>(ids[b])));
                if (v == 0) {
                    ex.targets.mass_facts = facts.mass;
                    ex.targets.charged_facts = facts.charged;
                    ex.targets.fact_weight = fact_weight;
                }
            } else {
                ex.targets.mass_weight = 0.0;
                ex.targets.relation_weight = 0.0;
            }
            per_set[s].push_back(std::move(ex));
        }
    });
    std::vector<PpiExample> out;
    for (auto& p : per_set)
        for (auto& e : p) out.push_back(std::move(e));
    return out;
}

std::vector<DynExample> dyn_examples(const std::vector<VideoSet>& sets, const std::vector<PropertyGraph>& graphs,
                                     int stride) {
    std::vector<std::vector<DynExample>> per_set(sets.size());
    parallel_for(sets.size(), [&](std::size_t s) {
        const VideoSet& set = sets[s];
        const PropertyGraph& g = graphs[s];
        for (std::size_t v = 0; v <= set.observed.references.size(); ++v) {
            const Trajectory& traj = video_at(set.observed, v).trajectory;
            const auto ids = roster_ids(set, v);
            const std::size_t n = ids.size();
            std::vector<int> z(edge_count(n), 2);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) {
                    const int c = relation_class(
                        g.relation(static_cast<std::size_t>(ids[a]), static_cast<std::size_t>(ids[b])));
                    z[edge_index(a, b, n)] = c < 0 ? 2 : c;
                }
            for (std::size_t t = 2; t + 1 < traj.frame_count(); t += static_cast<std::size_t>(stride)) {
                DynExample ex;
                ex.z = z;
                for (std::size_t i = 0; i < n; ++i) {
                    ex.nodes.push_back(dyn_node_input({&traj.at(t - 2, i), &traj.at(t - 1, i), &traj.at(t, i)},
                                                      g.mass[static_cast<std::size_t>(ids[i])] == MassLabel::Heavy));
                    const ObjectState& nx = traj.at(t + 1, i);
                    ex.next.push_back({nx.position.x, nx.position.y, 2.0 * nx.radius, 2.0 * nx.radius});
                }
                per_set[s].push_back(std::move(ex));
            }
        }
    });
    std::vector<DynExample> out;
    for (auto& p : per_set)
        for (auto& e : p) out.push_back(std::move(e));
    return out;
}

}  // namespace

namespace {
RolloutError rollout_error(const DynModel& m, const std::vector<VideoSet>& sets,
                           const std::vector<PropertyGraph>& graphs, int horizon, int stride);
}  // namespace

TrainResult train(const std::vector<VideoSet>& sets, const std::vector<Question>& questions, const TrainConfig& cfg) {
    if (sets.empty()) throw Error(ErrorKind::Config, "training needs at least one set");
    TrainResult result;
    Rng init(derive_seed(cfg.seed, 0));
    result.models.ppi = PpiModel::create(init, cfg.hidden);
    result.models.dyn = DynModel::create(init, cfg.hidden);
    Rng order(derive_seed(cfg.seed, 1));

    auto ppi_fn = [](const PpiModel& m, const PpiExample& ex, PpiModel* g) {
        return ppi_loss(m, ex.inputs, {}, ex.targets, g);
    };
    const auto grounding = ppi_examples(sets, questions, 0.0, false);
    run_lesson(result.models.ppi, grounding, cfg.ground_epochs, cfg, order, "ground", ppi_fn, result.losses);
    const auto properties = ppi_examples(sets, questions, cfg.fact_weight, true);
    run_lesson(result.models.ppi, properties, cfg.ppi_epochs, cfg, order, "properties", ppi_fn, result.losses);

    std::vector<PropertyGraph> pseudo(sets.size());
    parallel_for(sets.size(), [&](std::size_t s) { pseudo[s] = ppi_infer(result.models.ppi, sets[s].observed); });
    const auto dyn = dyn_examples(sets, pseudo, std::max(cfg.window_stride, 1));
    auto dyn_fn = [](const DynModel& m, const DynExample& ex, DynModel* g) {
        return dyn_loss(m, ex.nodes, ex.z, {}, ex.next, g);
    };
    DynModel best = result.models.dyn;
    double best_error = rollout_error(best, sets, pseudo, 25, 25).model;
    run_lesson(result.models.dyn, dyn, cfg.dyn_epochs, cfg, order, "dynamics", dyn_fn, result.losses, [&](int) {
        const double e = rollout_error(result.models.dyn, sets, pseudo, 25, 25).model;
        if (e < best_error) {
            best_error = e;
            best = result.models.dyn;
        }
    });
    result.models.dyn = std::move(best);
    return result;
}

PpiAccuracy evaluate_ppi(const PpiModel& m, const std::vector<VideoSet>& sets) {
    std::vector<PropertyGraph> graphs(sets.size());
    parallel_for(sets.size(), [&](std::size_t s) { graphs[s] = ppi_infer(m, sets[s].observed); });
    PpiAccuracy acc;
    std::size_t mass_ok = 0, heavy = 0, rel_ok = 0;
    std::array<std::size_t, 3> rel_counts{};
    for (std::size_t s = 0; s < sets.size(); ++s) {
        const PropertyGraph& truth = sets[s].truth.graph;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            ++acc.nodes;
            mass_ok += graphs[s].mass[i] == truth.mass[i] ? 1 : 0;
            heavy += truth.mass[i] == MassLabel::Heavy ? 1 : 0;
        }
        for (std::size_t e = 0; e < truth.relations.size(); ++e) {
            ++acc.edges;
            rel_ok += graphs[s].relations[e] == truth.relations[e] ? 1 : 0;
            const int c = relation_class(truth.relations[e]);
            if (c >= 0) ++rel_counts[static_cast<std::size_t>(c)];
        }
    }
    if (acc.nodes) {
        acc.mass = static_cast<double>(mass_ok) / static_cast<double>(acc.nodes);
        acc.mass_majority = static_cast<double>(std::max(heavy, acc.nodes - heavy)) / static_cast<double>(acc.nodes);
    }
    if (acc.edges) {
        acc.charge = static_cast<double>(rel_ok) / static_cast<double>(acc.edges);
        acc.charge_majority = static_cast<double>(*std::max_element(rel_counts.begin(), rel_counts.end())) /
                              static_cast<double>(acc.edges);
    }
    return acc;
}

namespace {

RolloutError rollout_error(const DynModel& m, const std::vector<VideoSet>& sets,
                           const std::vector<PropertyGraph>& graphs, int horizon, int stride) {
    std::vector<std::vector<std::pair<double, double>>> per_set(sets.size());
    parallel_for(sets.size(), [&](std::size_t s) {
        const Trajectory& traj = sets[s].observed.target.trajectory;
        const std::size_t n = traj.object_count();
        const auto h = static_cast<std::size_t>(horizon);
        for (std::size_t start = 0; start + 3 + h <= traj.frame_count(); start += static_cast<std::size_t>(stride)) {
            std::vector<std::vector<ObjectState>> init(traj.frames.begin() + static_cast<long>(start),
                                                       traj.frames.begin() + static_cast<long>(start + 3));
            const Trajectory pred = rollout(m, init, graphs[s], horizon);
            double model = 0.0, cv = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 p1 = init[1][i].position;
                const Vec2 p2 = init[2][i].position;
                const Vec2 v = p2 - p1;
                for (std::size_t k = 0; k < h; ++k) {
                    const Vec2 truth = traj.at(start + 3 + k, i).position;
                    model += (pred.frames[k][i].position - truth).norm();
                    cv += (p2 + v * static_cast<double>(k + 1) - truth).norm();
                }
            }
            const double count = static_cast<double>(n * h);
            per_set[s].emplace_back(model / count, cv / count);
        }
    });
    RolloutError err;
    for (const auto& p : per_set)
        for (auto [a, b] : p) {
            err.model += a;
            err.constant_velocity += b;
            ++err.windows;
        }
    if (err.windows) {
        err.model /= static_cast<double>(err.windows);
        err.constant_velocity /= static_cast<double>(err.windows);
    }
    return err;
}

}  // namespace

RolloutError evaluate_rollout(const DynModel& m, const std::vector<VideoSet>& sets, int horizon, int stride) {
    std::vector<PropertyGraph> graphs;
    graphs.reserve(sets.size());
    for (const auto& s : sets) graphs.push_back(s.truth.graph);
    return rollout_error(m, sets, graphs, horizon, stride);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::json mlp_json(const Mlp& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& d : m.layers)
        layers.push_back({{"in", d.in},
                          {"out", d.out},
                          {"activation", d.act == Activation::Relu ? "relu" : "identity"},
                          {"w", d.w},
                          {"b", d.b}});
    return layers;
}

Mlp mlp_from(const nlohmann::json& j) {
    Mlp m;
    for (const auto& l : j) {
        Dense d;
        d.in = l.at("in");
        d.out = l.at("out");
        d.act = l.at("activation") == "relu" ? Activation::Relu : Activation::Identity;
        d.w = l.at("w").get<Vec>();
        d.b = l.at("b").get<Vec>();
        if (d.w.size() != static_cast<std::size_t>(d.in * d.out) || d.b.size() != static_cast<std::size_t>(d.out))
            throw Error(ErrorKind::Data, "layer shape does not match its weights");
        if (!m.layers.empty() && m.layers.back().out != d.in) throw Error(ErrorKind::Data, "layer dims do not chain");
        m.layers.push_back(std::move(d));
    }
    return m;
}

template <typename Model>
nlohmann::json parts_json(Model& m) {
    nlohmann::json out = nlohmann::json::object();
    for (auto& p : m.parts()) out[p.name] = mlp_json(*p.mlp);
    return out;
}

template <typename Model>
void parts_from(Model& m, const nlohmann::json& j) {
    for (auto& p : m.parts()) {
        if (!j.contains(p.name)) throw Error(ErrorKind::Data, "checkpoint lacks " + p.name);
        *p.mlp = mlp_from(j.at(p.name));
    }
}

}  // namespace

nlohmann::json checkpoint_json(Models& models) {
    return {{"format", "comphy-models"}, {"version", 1}, {"ppi", parts_json(models.ppi)}, {"dyn", parts_json(models.dyn)}};
}

Models models_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "comphy-models" || j.value("version", 0) != 1)
        throw Error(ErrorKind::Data, "not a version-1 model checkpoint");
    Models m;
    parts_from(m.ppi, j.at("ppi"));
    parts_from(m.dyn, j.at("dyn"));
    return m;
}

void save_checkpoint(const std::filesystem::path& path, Models& models) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << checkpoint_json(models).dump() << '\n';
}

Models load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    try {
        return models_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Data, path.string() + ": " + e.what());
    }
}

void write_losses_csv(const std::filesystem::path& path, const std::vector<LossPoint>& losses) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << "lesson,epoch,loss\n";
    out.precision(17);
    for (const auto& l : losses) out << l.lesson << ',' << l.epoch << ',' << l.loss << '\n';
}

}  // namespace comphy
