#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <starfish/sim/experiment.hpp>

namespace starfish {
    std::vector<cell> enumerate_cells(const experiment_config &c)
    {
        std::vector<cell> cells;
        for (const auto k: c.strategies)
            for (const auto m: c.capacity_multipliers)
                for (const auto s: c.skewness)
                    for (const auto seed: c.seeds)
                        cells.push_back({ k, m, s, seed });
        return cells;
    }

    run_metrics run_cell(const topology &t, const experiment_config &c, const cell &k)
    {
        auto state = build_network(t, k.capacity_mult);
        const strategy_setup setup { k.strategy, state, { c.max_cycle, c.delta, c.refill, c.revive_willing },
            c.enabled == strategy_nodes::all ? std::vector<node_index> {} : top_decile(state) };
        const auto work = generate_workload(state, c.payments, k.skewness, c.values, k.seed, c.skew);
        const auto endowment = state.total_coins();

        run_metrics m;
        m.ops = op_counter { state.node_count() };
        setup.record_setup(m.ops);
        const auto *rebalancer = k.strategy == strategy_kind::ln ? nullptr : &setup;
        router r;
        const auto violation = [&](const std::string &what) {
            if (m.violations.size() < 16)
                m.violations.push_back("payment " + std::to_string(m.attempted) + ": " + what);
        };
        for (const auto &p: work.payments) {
            ++m.attempted;
            bool ok = false;
            if (const auto direct = r.find(state, p.sender, p.receiver, p.amount, hop_rule::balance)) {
                const auto out = execute_payment(state, nullptr, *direct, p.amount, &m.ops);
                ok = out.success;
                if (!out.violation.empty())
                    violation(out.violation);
            } else if (rebalancer) {
                if (const auto path = r.find(state, p.sender, p.receiver, p.amount, hop_rule::reachable, rebalancer)) {
                    const auto out = execute_payment(state, rebalancer, *path, p.amount, &m.ops);
                    ok = out.success;
                    if (ok && out.rebalances > 0) {
                        ++m.rebalanced_payments;
                        if (k.strategy == strategy_kind::close_open || k.strategy == strategy_kind::loop)
                            m.locked_rounds += c.delta * out.rebalances;
                    }
                    if (!out.violation.empty())
                        violation(out.violation);
                }
            }
            ok ? ++m.succeeded : ++m.failed;
            if (c.audit == audit_level::full) {
                ++m.audits;
                if (state.total_coins() != endowment)
                    violation("coin supply changed");
                if (const auto neg = state.find_negative(); !neg.empty())
                    violation(neg);
            }
            state.advance_clock();
        }
        ++m.audits;
        if (state.total_coins() != endowment)
            violation("coin supply changed over the run");
        if (const auto neg = state.find_negative(); !neg.empty())
            violation(neg);
        m.success_ratio = m.attempted == 0 ? 0.0 : static_cast<double>(m.succeeded) / static_cast<double>(m.attempted);
        return m;
    }

    std::vector<cell_result> run_experiment(const experiment_config &c, const topology &t, const std::size_t jobs,
        const progress_fn &progress)
    {
        const auto cells = enumerate_cells(c);
        std::vector<cell_result> results(cells.size());
        std::atomic<std::size_t> next { 0 };
        std::size_t done = 0;
        std::mutex mu;
        const auto worker = [&] {
            for (auto i = next++; i < cells.size(); i = next++) {
                cell_result res { cells[i], {}, {} };
                try {
                    res.metrics = run_cell(t, c, cells[i]);
                } catch (const std::exception &e) {
                    res.error = e.what();
                }
                std::lock_guard lock { mu };
                results[i] = std::move(res);
                ++done;
                if (progress)
                    progress(results[i], done, cells.size());
            }
        };
        const auto threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t i = 0; i < threads; ++i)
                pool.emplace_back(worker);
        }
        return results;
    }

    std::vector<cell_summary> summarize(const std::vector<cell_result> &results)
    {
        std::vector<cell_summary> out;
        std::map<std::tuple<int, amount_t, double>, std::size_t> index;
        for (const auto &r: results) {
            if (!r.error.empty())
                continue;
            const auto key = std::make_tuple(static_cast<int>(r.key.strategy), r.key.capacity_mult, r.key.skewness);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, out.size()).first;
                out.push_back({ r.key.strategy, r.key.capacity_mult, r.key.skewness, 0, 0.0, 0.0 });
            }
            auto &s = out[it->second];
            ++s.runs;
            s.mean_success_ratio += r.metrics.success_ratio;
            s.mean_onchain_ops += static_cast<double>(r.metrics.ops.total());
        }
        for (auto &s: out) {
            s.mean_success_ratio /= static_cast<double>(s.runs);
            s.mean_onchain_ops /= static_cast<double>(s.runs);
        }
        return out;
    }

    const cell_summary *find_summary(const std::vector<cell_summary> &s, const strategy_kind k, const amount_t mult, const double skew)
    {
        for (const auto &x: s)
            if (x.strategy == k && x.capacity_mult == mult && x.skewness == skew)
                return &x;
        return nullptr;
    }

    std::string format_number(const double v, const int decimals)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        std::string s { buf };
        if (s.find('.') != std::string::npos) {
            while (s.back() == '0')
                s.pop_back();
            if (s.back() == '.')
                s.pop_back();
        }
        return s;
    }

    void write_results_csv(std::ostream &out, const std::vector<cell_result> &results)
    {
        out << "strategy,capacity_mult,skewness,seed,attempted,succeeded,success_ratio,onchain_ops\n";
        for (const auto &r: results) {
            if (!r.error.empty())
                continue;
            out << to_string(r.key.strategy) << ',' << r.key.capacity_mult << ',' << format_number(r.key.skewness) << ','
                << r.key.seed << ',' << r.metrics.attempted << ',' << r.metrics.succeeded << ','
                << format_number(r.metrics.success_ratio) << ',' << r.metrics.ops.total() << '\n';
        }
    }

    void write_summary_csv(std::ostream &out, const std::vector<cell_summary> &summary)
    {
        out << "strategy,capacity_mult,skewness,runs,mean_success_ratio,mean_onchain_ops\n";
        for (const auto &s: summary)
            out << to_string(s.strategy) << ',' << s.capacity_mult << ',' << format_number(s.skewness) << ',' << s.runs << ','
                << format_number(s.mean_success_ratio) << ',' << format_number(s.mean_onchain_ops, 1) << '\n';
    }
}
