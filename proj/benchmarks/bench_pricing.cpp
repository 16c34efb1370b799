#include <benchmark/benchmark.h>

#include <corrheston/calibration.hpp>
#include <corrheston/charfn.hpp>
#include <corrheston/fourier.hpp>

using namespace corrheston;

namespace {

const ModelParams kParams = symmetric_params(0.0064, 0.35, 2.0, 0.05, 0.4);

void char_fn_eval(benchmark::State& state) {
    double xi = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_return_char_fn(xi, 0.25, kParams));
        xi += 1e-9;
    }
}
BENCHMARK(char_fn_eval);

void vanilla_price(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(price_vanilla({1.02, 0.25, OptionSide::Call}, 1.0, kParams));
    }
}
BENCHMARK(vanilla_price)->Unit(benchmark::kMicrosecond);

void prepared_price(benchmark::State& state) {
    const QuadraturePlan plan = plan_quadrature(1.0, 0.25, 1.0, kParams);
    const PreparedFourierPricer pricer(kParams, 0.25, plan.nodes, plan.truncation);
    double k = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pricer.price(k, kParams.v0_plus, kParams.v0_minus, OptionSide::Call));
        k += 1e-9;
    }
}
BENCHMARK(prepared_price)->Unit(benchmark::kMicrosecond);

void calibration(benchmark::State& state) {
    const SmileQuote quote{0.25, 0.08, 0.01, 0.005};
    const double eta = static_cast<double>(state.range(0)) / 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(calibrate(quote, 1.0, 2.0, eta, 0.0, 0.0));
    }
}
BENCHMARK(calibration)->Arg(0)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
