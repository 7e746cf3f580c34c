#include <benchmark/benchmark.h>
#include <starfish/sim/topology.hpp>
#include <starfish/strategies/strategy.hpp>

using namespace starfish;

namespace {
    // hub with the most channels; its plans touch the largest local views
    node_index busiest(const pcn_state &state)
    {
        node_index best = 0;
        for (node_index n = 0; n < state.node_count(); ++n)
            if (state.neighbors(n).size() > state.neighbors(best).size())
                best = n;
        return best;
    }

    void plan(benchmark::State &st, const strategy_kind kind)
    {
        const auto state = build_network(synthesize_topology({}), 1);
        const strategy_setup setup { kind, state, { .refill = refill_policy::equalize } };
        const auto hub = busiest(state);
        const auto target = state.neighbors(hub).front().channel;
        for (auto _: st)
            benchmark::DoNotOptimize(plan_rebalance(setup, state, hub, target, 30));
    }
}

static void bm_plan_starfish(benchmark::State &st) { plan(st, strategy_kind::starfish); }
static void bm_plan_shaduf_ab(benchmark::State &st) { plan(st, strategy_kind::shaduf_ab); }
static void bm_plan_revive(benchmark::State &st) { plan(st, strategy_kind::revive); }

static void bm_setup_starfish(benchmark::State &st)
{
    const auto state = build_network(synthesize_topology({}), 1);
    for (auto _: st)
        benchmark::DoNotOptimize(strategy_setup { strategy_kind::starfish, state }.setup_ops());
}

BENCHMARK(bm_plan_starfish);
BENCHMARK(bm_plan_shaduf_ab);
BENCHMARK(bm_plan_revive);
BENCHMARK(bm_setup_starfish);
