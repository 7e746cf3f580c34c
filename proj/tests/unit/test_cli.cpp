#include <gtest/gtest.h>
#include <unistd.h>
#include "cli.hpp"
#include "harness.hpp"

using namespace starfish;
using starfish::testing::read_file;
using starfish::testing::source_root;

namespace {
    struct invocation {
        int code = 0;
        std::string out;
        std::string err;
    };

    invocation call(std::vector<std::string> args)
    {
        args.insert(args.begin(), "starfish");
        std::vector<const char *> argv;
        for (const auto &a: args)
            argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return { code, out.str(), err.str() };
    }

    class scratch_dir {
    public:
        explicit scratch_dir(const std::string &tag):
            _path { std::filesystem::temp_directory_path() / ("starfish-cli-" + tag + "-" + std::to_string(::getpid())) }
        {
            std::filesystem::remove_all(_path);
        }
        ~scratch_dir() { std::filesystem::remove_all(_path); }
        const std::filesystem::path &path() const { return _path; }
        std::string str() const { return _path.string(); }
    private:
        std::filesystem::path _path;
    };

    std::string scenario(const std::string &name) { return (source_root() / "scenarios" / (name + ".json")).string(); }
}

TEST(cli_opcount, prints_one_row_per_channel_count)
{
    const auto r = call({ "opcount", "--max-n", "5" });
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "n,Starfish,ShadufHL,ShadufAO,ShadufAB\n2,2,2,2,2\n3,3,2,4,6\n4,4,4,6,12\n5,5,4,8,20\n");
}

TEST(cli_opcount, rejects_a_too_small_range)
{
    EXPECT_EQ(call({ "opcount", "--max-n", "1" }).code, cli::config_error);
}

TEST(cli_trace, writes_events_and_summary)
{
    scratch_dir dir { "trace" };
    const auto r = call({ "trace", "--config", scenario("walkthrough"), "--out", dir.str() });
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = nlohmann::json::parse(read_file(dir.path() / "summary.json"));
    EXPECT_EQ(summary["scenario"], "walkthrough");
    EXPECT_TRUE(summary["violations"].empty());
    EXPECT_EQ(r.out, read_file(dir.path() / "summary.json"));
    const auto events = read_file(dir.path() / "events.jsonl");
    EXPECT_GT(std::count(events.begin(), events.end(), '\n'), 100);
}

TEST(cli_trace, refuses_to_overwrite_without_force)
{
    scratch_dir dir { "overwrite" };
    ASSERT_EQ(call({ "trace", scenario("stale-close"), "--out", dir.str() }).code, 0);
    const auto again = call({ "trace", scenario("stale-close"), "--out", dir.str() });
    EXPECT_EQ(again.code, cli::config_error);
    EXPECT_NE(again.err.find("--force"), std::string::npos);
    EXPECT_EQ(call({ "trace", scenario("stale-close"), "--out", dir.str(), "--force" }).code, 0);
}

TEST(cli_trace, bad_inputs_exit_with_config_error)
{
    EXPECT_EQ(call({ "trace", "--config", "/nonexistent/scenario.json" }).code, cli::config_error);
    EXPECT_EQ(call({ "teleport" }).code, cli::config_error);
    EXPECT_EQ(call({}).code, cli::config_error);
    scratch_dir dir { "badjson" };
    std::filesystem::create_directories(dir.path());
    const auto path = dir.path() / "broken.json";
    std::ofstream(path) << "{ \"parties\": [\"A\", }";
    const auto r = call({ "trace", path.string() });
    EXPECT_EQ(r.code, cli::config_error);
    EXPECT_NE(r.err.find("line"), std::string::npos);
}

TEST(cli_sweep, unknown_config_key_is_a_config_error)
{
    scratch_dir dir { "sweepcfg" };
    std::filesystem::create_directories(dir.path());
    const auto path = dir.path() / "cfg.json";
    std::ofstream(path) << R"({"payments": 10})";
    const auto r = call({ "sweep", path.string() });
    EXPECT_EQ(r.code, cli::config_error);
    EXPECT_NE(r.err.find("$.payments"), std::string::npos);
}

TEST(cli_sweep, reruns_are_byte_identical)
{
    scratch_dir a { "sweep-a" }, b { "sweep-b" };
    const auto cfg = (source_root() / "configs" / "quick_sweep.json").string();
    const auto ra = call({ "sweep", cfg, "--out", a.str() });
    const auto rb = call({ "sweep", cfg, "--out", b.str(), "--jobs", "3" });
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(read_file(a.path() / "results.csv"), read_file(b.path() / "results.csv"));
    EXPECT_EQ(read_file(a.path() / "summary.csv"), read_file(b.path() / "summary.csv"));
}

TEST(cli_sweep, seed_override_changes_the_seed_column)
{
    scratch_dir dir { "sweep-seed" };
    const auto cfg = (source_root() / "configs" / "quick_sweep.json").string();
    ASSERT_EQ(call({ "sweep", cfg, "--out", dir.str(), "--seed", "40" }).code, 0);
    const auto results = read_file(dir.path() / "results.csv");
    EXPECT_NE(results.find("LN,1,8,40,"), std::string::npos);
    EXPECT_NE(results.find("LN,1,8,41,"), std::string::npos);
    EXPECT_EQ(results.find("LN,1,8,1,"), std::string::npos);
}
