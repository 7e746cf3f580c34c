#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <starfish/strategies/pcn_state.hpp>

namespace starfish {
    // Log-normal payment values: floor(scale * exp(N(mu, sigma))), at least 1.
    struct value_distribution {
        std::string preset = "small";
        double mu = 3.2;
        double sigma = 0.3;
        double scale = 1.0;
    };

    // "small" and "large" share (mu, sigma) and differ by a factor 10 in scale.
    value_distribution value_preset(const std::string &name);

    // Which payment endpoints the skewness weight applies to.
    enum class skew_side { receiver, sender, both };

    std::string_view to_string(skew_side s);
    skew_side parse_skew_side(std::string_view s);

    struct payment {
        node_index sender = 0;
        node_index receiver = 0;
        amount_t amount = 0;
    };

    struct workload {
        double skewness = 1.0;
        std::vector<payment> payments {};
    };

    // The ceil(n/10) highest-degree nodes; degree ties go to the smaller index.
    std::vector<node_index> top_decile(const pcn_state &state);

    // On the skewed side(s), top-decile nodes carry weight `skewness` and every other node weight 1;
    // an unskewed side is uniform. A sender equal to the receiver is redrawn.
    workload generate_workload(const pcn_state &state, std::size_t n, double skewness,
        const value_distribution &values, std::uint64_t seed, skew_side side = skew_side::both);
}
