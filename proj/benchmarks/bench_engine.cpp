#include <benchmark/benchmark.h>
#include <starfish/engine/scenario.hpp>

using namespace starfish;

static void bm_scenario(benchmark::State &st, const char *name)
{
    const auto s = load_scenario(std::string { STARFISH_SOURCE_ROOT } + "/scenarios/" + name + ".json");
    for (auto _: st)
        benchmark::DoNotOptimize(run_scenario(s, false));
}

BENCHMARK_CAPTURE(bm_scenario, walkthrough, "walkthrough");
BENCHMARK_CAPTURE(bm_scenario, honest_lifecycle, "honest-lifecycle");
