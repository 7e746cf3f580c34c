#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <starfish/sim/workload.hpp>

namespace starfish {
    value_distribution value_preset(const std::string &name)
    {
        if (name == "small")
            return { "small", 3.2, 0.3, 1.0 };
        if (name == "large")
            return { "large", 3.2, 0.3, 10.0 };
        throw error("unknown value preset '" + name + "'");
    }

    std::string_view to_string(const skew_side s)
    {
        switch (s) {
            case skew_side::receiver: return "receiver";
            case skew_side::sender: return "sender";
            case skew_side::both: return "both";
        }
        return "unknown";
    }

    skew_side parse_skew_side(const std::string_view s)
    {
        for (const auto side: { skew_side::receiver, skew_side::sender, skew_side::both })
            if (to_string(side) == s)
                return side;
        throw error("unknown skew side '" + std::string { s } + "'");
    }

    std::vector<node_index> top_decile(const pcn_state &state)
    {
        std::vector<node_index> order(state.node_count());
        std::iota(order.begin(), order.end(), node_index { 0 });
        std::stable_sort(order.begin(), order.end(), [&](const node_index x, const node_index y) {
            return state.neighbors(x).size() > state.neighbors(y).size();
        });
        order.resize((state.node_count() + 9) / 10);
        std::sort(order.begin(), order.end());
        return order;
    }

    workload generate_workload(const pcn_state &state, const std::size_t n, const double skewness,
        const value_distribution &values, const std::uint64_t seed, const skew_side side)
    {
        if (n == 0)
            throw error("workload size must be positive");
        if (state.node_count() < 2)
            throw error("workload needs at least two nodes");
        if (!(skewness > 0))
            throw error("skewness must be positive");
        std::vector<double> weights(state.node_count(), 1.0);
        for (const auto h: top_decile(state))
            weights[h] = skewness;

        std::mt19937_64 rng { seed };
        const std::vector<double> flat(state.node_count(), 1.0);
        const auto &rw = side == skew_side::sender ? flat : weights;
        const auto &sw = side == skew_side::receiver ? flat : weights;
        std::discrete_distribution<node_index> receiver { rw.begin(), rw.end() };
        std::discrete_distribution<node_index> sender { sw.begin(), sw.end() };
        std::lognormal_distribution<double> value { values.mu, values.sigma };

        workload w;
        w.skewness = skewness;
        w.payments.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = receiver(rng);
            auto s = sender(rng);
            while (s == r)
                s = sender(rng);
            const auto amount = std::max<amount_t>(1, static_cast<amount_t>(std::floor(values.scale * value(rng))));
            w.payments.push_back({ s, r, amount });
        }
        return w;
    }
}
