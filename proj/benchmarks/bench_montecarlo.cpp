#include <cmath>
#include <memory>

#include <benchmark/benchmark.h>

#include <corrheston/montecarlo.hpp>

using namespace corrheston;

namespace {

// Cheapest possible observer: sums terminal spots.
class SpotSum : public PathObserver {
public:
    std::unique_ptr<PathObserver> clone_empty() const override { return std::make_unique<SpotSum>(); }
    void end_path(std::span<const PathState> t) override { sum += std::exp(t[0].log_spot); }
    void merge(const PathObserver& o) override { sum += dynamic_cast<const SpotSum&>(o).sum; }
    double sum = 0.0;
};

// Path-steps per second for one or more models on a quarter-year horizon.
void evolve(benchmark::State& state) {
    const ModelParams p = symmetric_params(0.0064, 0.35, 2.0, 0.05, 0.4);
    const std::vector<ModelParams> models(static_cast<std::size_t>(state.range(0)), p);
    McConfig cfg;
    cfg.paths = 20'000;
    cfg.threads = 1;
    std::size_t steps = 0;
    for (auto _ : state) {
        SpotSum obs;
        PathObserver* list[] = {&obs};
        steps = evolve_paths(models, 1.0, 0.25, cfg, list).steps;
        benchmark::DoNotOptimize(obs.sum);
    }
    state.counters["path_steps"] = benchmark::Counter(
        static_cast<double>(cfg.paths * steps * models.size()) * static_cast<double>(state.iterations()),
        benchmark::Counter::kIsRate);
}
BENCHMARK(evolve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void qe_step(benchmark::State& state) {
    double v = 0.0064;
    double z = -1.5;
    for (auto _ : state) {
        v = qe_variance_step_normal(v, 0.0032, 2.0, 0.35, 1.0 / 252.0, z);
        z = z > 1.5 ? -1.5 : z + 0.01;
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(qe_step);

}  // namespace
