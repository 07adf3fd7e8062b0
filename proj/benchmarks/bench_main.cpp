#include <comphy/executor.hpp>
#include <comphy/genset.hpp>
#include <comphy/neural.hpp>
#include <comphy/propgraph.hpp>
#include <comphy/qlang.hpp>
#include <comphy/questions.hpp>

#include <benchmark/benchmark.h>

#include <algorithm>

using namespace comphy;

namespace {

const VideoSet& sample_set() {
    static const VideoSet s = [] {
        Rng rng(42);
        return generate_set(rng, GenConfig{}, "bench");
    }();
    return s;
}

void BM_Step(benchmark::State& state) {
    const VideoSet& s = sample_set();
    const SimConfig cfg;
    auto states = s.truth.initial_states[0];
    for (auto _ : state) {
        states = step(states, s.truth.props, cfg);
        benchmark::DoNotOptimize(states);
    }
}
BENCHMARK(BM_Step);

void BM_SimulateTarget(benchmark::State& state) {
    const VideoSet& s = sample_set();
    const SimConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(s.truth.initial_states[0], s.truth.props, cfg, 5.0));
}
BENCHMARK(BM_SimulateTarget)->Unit(benchmark::kMicrosecond);

void BM_GenerateSet(benchmark::State& state) {
    const GenConfig cfg;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(generate_set(rng, cfg, "b"));
    }
}
BENCHMARK(BM_GenerateSet)->Unit(benchmark::kMillisecond);

void BM_InferProperties(benchmark::State& state) {
    const VideoSet& s = sample_set();
    for (auto _ : state) benchmark::DoNotOptimize(infer_properties(s.observed));
}
BENCHMARK(BM_InferProperties)->Unit(benchmark::kMicrosecond);

void BM_Parse(benchmark::State& state) {
    const std::string text = "How many heavy red metal cubes carry the opposite charge to the cyan rubber sphere?";
    for (auto _ : state) benchmark::DoNotOptimize(parse(text));
}
BENCHMARK(BM_Parse);

void BM_ExecuteCounterfactual(benchmark::State& state) {
    for (std::uint64_t seed = 0;; ++seed) {
        Rng rng(seed);
        const VideoSet s = generate_set(rng, GenConfig{}, "cf");
        const auto questions = instantiate(s, rng);
        const auto it = std::find_if(questions.begin(), questions.end(),
                                     [](const Question& q) { return q.kind == QuestionKind::Counterfactual; });
        if (it == questions.end()) continue;
        const ExecContext ctx = truth_context(s);
        for (auto _ : state) benchmark::DoNotOptimize(execute(it->program, ctx));
        return;
    }
}
BENCHMARK(BM_ExecuteCounterfactual)->Unit(benchmark::kMicrosecond);

void BM_PpiForward(benchmark::State& state) {
    Rng rng(2);
    const PpiModel m = PpiModel::create(rng);
    const auto inputs = ppi_inputs(sample_set().observed.target.trajectory);
    for (auto _ : state) benchmark::DoNotOptimize(ppi_forward(m, inputs, {}));
}
BENCHMARK(BM_PpiForward)->Unit(benchmark::kMicrosecond);

void BM_DynRollout(benchmark::State& state) {
    Rng rng(3);
    const DynModel m = DynModel::create(rng);
    const VideoSet& s = sample_set();
    const auto& frames = s.observed.target.trajectory.frames;
    const std::vector<std::vector<ObjectState>> init(frames.begin(), frames.begin() + 3);
    for (auto _ : state) benchmark::DoNotOptimize(rollout(m, init, s.truth.graph, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DynRollout)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
