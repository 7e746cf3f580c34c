#include <benchmark/benchmark.h>
#include <random>
#include <starfish/sim/routing.hpp>
#include <starfish/sim/topology.hpp>

using namespace starfish;

namespace {
    pcn_state network(std::size_t nodes)
    {
        synthesis_spec spec;
        spec.nodes = nodes;
        return build_network(synthesize_topology(spec), 1);
    }

    void find_routes(benchmark::State &st, const hop_rule rule)
    {
        const auto state = network(static_cast<std::size_t>(st.range(0)));
        const strategy_setup setup { strategy_kind::starfish, state };
        const auto n = static_cast<node_index>(state.node_count());
        std::mt19937_64 rng { 1 };
        router r;
        for (auto _: st) {
            const auto s = static_cast<node_index>(rng() % n);
            const auto t = static_cast<node_index>((s + 1 + rng() % (n - 1)) % n);
            benchmark::DoNotOptimize(r.find(state, s, t, 20, rule, &setup));
        }
    }
}

static void bm_route_balance(benchmark::State &st) { find_routes(st, hop_rule::balance); }
static void bm_route_reachable(benchmark::State &st) { find_routes(st, hop_rule::reachable); }

BENCHMARK(bm_route_balance)->Arg(200)->Arg(2000);
BENCHMARK(bm_route_reachable)->Arg(200)->Arg(2000);
