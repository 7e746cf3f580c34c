#include <CLI11.hpp>
#include <fstream>
#include <sstream>
#include <starfish/engine/scenario.hpp>
#include <starfish/sim/experiment.hpp>
#include <starfish/strategies/strategy.hpp>
#include "cli.hpp"

namespace starfish::cli {
    namespace {
        struct config_failure: error {
            using error::error;
        };

        // Creates `dir` and refuses to clobber any of `files` unless forced.
        void prepare_output(const std::filesystem::path &dir, std::initializer_list<const char *> files, const bool force)
        {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec)
                throw config_failure("cannot create output directory " + dir.string() + ": " + ec.message());
            if (force)
                return;
            for (const auto *f: files)
                if (std::filesystem::exists(dir / f))
                    throw config_failure((dir / f).string() + " already exists; pass --force to overwrite");
        }

        void write_file(const std::filesystem::path &path, const std::string &content)
        {
            std::ofstream f { path, std::ios::binary | std::ios::trunc };
            if (!f)
                throw config_failure("cannot write " + path.string());
            f << content;
        }
    }

    std::string opcount_csv(const std::size_t max_n)
    {
        constexpr std::array kinds { strategy_kind::starfish, strategy_kind::shaduf_hl, strategy_kind::shaduf_ao, strategy_kind::shaduf_ab };
        std::ostringstream out;
        out << "n";
        for (const auto k: kinds)
            out << ',' << to_string(k);
        out << '\n';
        for (std::size_t n = 2; n <= max_n; ++n) {
            // distinct balances so the binding order is fully determined
            std::vector<local_channel> adjacent;
            for (std::size_t i = 0; i < n; ++i)
                adjacent.push_back({ static_cast<channel_index>(i), static_cast<node_index>(i + 1), static_cast<amount_t>(10 * (i + 1)) });
            out << n;
            for (const auto k: kinds)
                out << ',' << plan_setup(k, adjacent).ops;
            out << '\n';
        }
        return out.str();
    }

    int cmd_trace(const cli_config &c, std::ostream &out, std::ostream &err)
    {
        scenario s;
        try {
            s = load_scenario(c.config);
            if (c.seed)
                s.seed = *c.seed;
            if (c.out)
                prepare_output(*c.out, { "events.jsonl", "summary.json" }, c.force);
        } catch (const std::exception &e) {
            err << "error: " << e.what() << '\n';
            return config_error;
        }
        const auto w = run_scenario(s);
        nlohmann::ordered_json summary { { "scenario", s.name } };
        summary.update(final_state(*w));
        const auto text = summary.dump(2) + "\n";
        if (c.out) {
            try {
                write_file(*c.out / "events.jsonl", w->log().to_jsonl());
                write_file(*c.out / "summary.json", text);
            } catch (const std::exception &e) {
                err << "error: " << e.what() << '\n';
                return config_error;
            }
        }
        if (c.verbose)
            err << w->log().to_jsonl();
        out << text;
        if (!w->violations().empty()) {
            for (const auto &v: w->violations())
                err << "invariant violation at round " << v.round << ": " << v.what << '\n';
            return invariant_violation;
        }
        return ok;
    }

    int cmd_opcount(const cli_config &c, std::ostream &out, std::ostream &err)
    {
        if (c.max_n < 2) {
            err << "error: --max-n must be at least 2\n";
            return config_error;
        }
        const auto csv = opcount_csv(c.max_n);
        if (c.out) {
            try {
                prepare_output(*c.out, { "opcount.csv" }, c.force);
                write_file(*c.out / "opcount.csv", csv);
            } catch (const std::exception &e) {
                err << "error: " << e.what() << '\n';
                return config_error;
            }
        }
        out << csv;
        return ok;
    }

    int cmd_sweep(const cli_config &c, std::ostream &out, std::ostream &err)
    {
        experiment_config cfg;
        topology topo;
        try {
            cfg = load_experiment_config(c.config);
            if (c.seed) {
                // the seed list keeps its length and starts at the override
                for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
                    cfg.seeds[i] = *c.seed + i;
            }
            topo = load_topology(cfg);
            if (c.out)
                prepare_output(*c.out, { "results.csv", "summary.csv" }, c.force);
        } catch (const std::exception &e) {
            err << "error: " << e.what() << '\n';
            return config_error;
        }
        progress_fn progress;
        if (c.verbose)
            progress = [&err](const cell_result &r, const std::size_t done, const std::size_t total) {
                err << '[' << done << '/' << total << "] " << to_string(r.key.strategy) << " x" << r.key.capacity_mult << " skew "
                    << format_number(r.key.skewness) << " seed " << r.key.seed << ": "
                    << (r.error.empty() ? format_number(r.metrics.success_ratio, 4) : "error " + r.error) << '\n';
            };
        const auto results = run_experiment(cfg, topo, c.jobs, progress);
        const auto summary = summarize(results);

        std::ostringstream results_csv;
        write_results_csv(results_csv, results);
        std::ostringstream summary_csv;
        write_summary_csv(summary_csv, summary);
        if (c.out) {
            try {
                write_file(*c.out / "results.csv", results_csv.str());
                write_file(*c.out / "summary.csv", summary_csv.str());
            } catch (const std::exception &e) {
                err << "error: " << e.what() << '\n';
                return config_error;
            }
        }
        out << "# skewness = weight of the top-decile-degree nodes when sampling payment endpoints (" << to_string(cfg.skew)
            << "); an interpretation, not a measured quantity\n";
        out << summary_csv.str();

        int code = ok;
        for (const auto &r: results) {
            if (!r.error.empty()) {
                err << "cell " << to_string(r.key.strategy) << " x" << r.key.capacity_mult << " seed " << r.key.seed << " failed: " << r.error << '\n';
                code = std::max<int>(code, config_error);
            }
            for (const auto &v: r.metrics.violations) {
                err << "invariant violation in " << to_string(r.key.strategy) << " x" << r.key.capacity_mult << " seed " << r.key.seed
                    << ": " << v << '\n';
                if (code == ok)
                    code = invariant_violation;
            }
        }
        return code;
    }

    int run(const int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app { "Starfish channel-merging protocol simulator and PCN experiment harness", "starfish" };
        app.require_subcommand(1);
        cli_config c;
        std::string out_dir;
        std::uint64_t seed = 0;

        const auto common = [&](CLI::App *sub, const bool needs_config) {
            auto *cfg = sub->add_option("--config,config", c.config, needs_config ? "input file" : "unused");
            if (needs_config)
                cfg->required()->check(CLI::ExistingFile);
            sub->add_option("--out", out_dir, "output directory (created if absent)");
            sub->add_option("--seed", seed, "seed override");
            sub->add_flag("--force", c.force, "overwrite existing output files");
            sub->add_flag("--verbose,-v", c.verbose, "progress and event output on stderr");
        };
        auto *trace = app.add_subcommand("trace", "run a protocol scenario and print the final state");
        common(trace, true);
        auto *opcount = app.add_subcommand("opcount", "table of on-chain setup operations per strategy");
        opcount->add_option("--max-n", c.max_n, "largest channel count N")->check(CLI::Range(2, 4096));
        opcount->add_option("--out", out_dir, "output directory (created if absent)");
        opcount->add_flag("--force", c.force, "overwrite existing output files");
        opcount->add_flag("--verbose,-v", c.verbose, "unused");
        auto *sweep = app.add_subcommand("sweep", "run a success-ratio experiment sweep");
        common(sweep, true);
        sweep->add_option("--jobs,-j", c.jobs, "worker threads")->check(CLI::PositiveNumber);

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp &) {
            out << app.help();
            return ok;
        } catch (const CLI::ParseError &e) {
            const auto *target = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
            err << "error: " << e.what() << '\n' << target->help();
            return config_error;
        }
        if (!out_dir.empty())
            c.out = out_dir;
        for (const auto *sub: app.get_subcommands()) {
            if (const auto *opt = sub->get_option_no_throw("--seed"); opt && opt->count() > 0)
                c.seed = seed;
            c.subcommand = sub->get_name();
        }
        if (c.subcommand == "trace")
            return cmd_trace(c, out, err);
        if (c.subcommand == "opcount")
            return cmd_opcount(c, out, err);
        return cmd_sweep(c, out, err);
    }
}
