#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "minispace/gateway/cli.hpp"

using namespace minispace;
using namespace minispace::gateway;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "space");
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    TempDir() : path(fs::temp_directory_path() / ("minispace_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

// Exit status of the real binary.
int shell(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("gen is deterministic and validates flags") {
        const Run a = run({"gen", "--week", "3", "--seed", "42"});
        CHECK(a.code == 0);
        const auto doc = nlohmann::json::parse(a.out);
        CHECK(doc["week"] == 3);
        CHECK(doc["perspective_trials"].size() == 16);
        CHECK(run({"gen", "--week", "3", "--seed", "42"}).out == a.out);
        CHECK(run({"gen", "--week", "3", "--seed", "43"}).out != a.out);

        const Run bad = run({"gen", "--week", "4", "--seed", "1"});
        CHECK(bad.code == 2);
        CHECK(nlohmann::json::parse(bad.err.substr(0, bad.err.find('\n')))["error"]["kind"] == "usage");
        CHECK(run({"gen", "--seed", "1"}).code == 2);
        CHECK(run({"gen", "--week", "1", "--seed", "1", "--frobnicate"}).code == 2);
        CHECK(run({"nope"}).code == 2);
        CHECK(run({}).code == 2);
        CHECK(run({"--help"}).code == 0);
    }

    TEST_CASE("parse reports validation errors on stderr") {
        TempDir tmp;
        auto log = fixtures::make_log("P01", 1, 5);
        {
            std::ofstream(tmp.path / "good.json") << write_session(log);
        }
        auto doc = nlohmann::json::parse(write_session(fixtures::make_log("P01", 1, 5)));
        doc["perspective_trials"].erase(doc["perspective_trials"].size() - 1);
        {
            std::ofstream(tmp.path / "bad.json") << doc.dump();
        }
        const Run good = run({"parse", (tmp.path / "good.json").string()});
        CHECK(good.code == 0);
        CHECK(good.err.empty());

        const Run bad = run({"parse", (tmp.path / "bad.json").string()});
        CHECK(bad.code == 1);
        const auto line = nlohmann::json::parse(bad.err.substr(0, bad.err.find('\n')));
        CHECK(line["error"]["status"] == "error");
        CHECK(line["error"]["error"]["kind"] == "validation");
        CHECK(line["error"]["error"]["failures"][0].get<std::string>().find("perspective_trials.count") != std::string::npos);

        const Run both = run({"parse", "--json", (tmp.path / "good.json").string(), (tmp.path / "bad.json").string()});
        CHECK(both.code == 1);
        std::istringstream lines(both.out);
        std::string first, second;
        std::getline(lines, first);
        std::getline(lines, second);
        CHECK(nlohmann::json::parse(first)["status"] == "ok");
        CHECK(nlohmann::json::parse(second)["status"] == "error");

        CHECK(run({"parse", (tmp.path / "missing.json").string()}).code == 2);
    }

    TEST_CASE("export flags") {
        TempDir tmp;
        const auto archive = tmp.path / "batch.zip";
        {
            std::ofstream(archive, std::ios::binary) << write_session_archive(fixtures::small_batch());
        }
        const Run quick = run({"export", archive.string()});
        CHECK(quick.code == 0);
        CHECK(quick.out.rfind("participant_id,week,rotation_time_s", 0) == 0);

        const Run cols = run({"export", "--mode", "detailed", "--columns", "sus, week", archive.string()});
        CHECK(cols.code == 0);
        CHECK(cols.out.rfind("week,sus\r\n", 0) == 0);

        const Run listed = run({"export", "--mode", "detailed", "--list-columns", archive.string()});
        CHECK(nlohmann::json::parse(listed.out)["groups"].size() == 4);

        const Run unknown = run({"export", "--columns", "week,bogus", archive.string()});
        CHECK(unknown.code == 1);
        CHECK(nlohmann::json::parse(unknown.err)["error"]["unknown_columns"][0] == "bogus");

        CHECK(run({"export", "--mode", "fancy", archive.string()}).code == 2);
    }

    TEST_CASE("simulate and analyze reruns are byte-identical") {
        TempDir tmp;
        const std::vector<std::string> flags{"--seed", "7", "--n-per-cell", "4", "--no-supervised"};
        auto with = [&](std::vector<std::string> head) {
            head.insert(head.end(), flags.begin(), flags.end());
            return head;
        };
        CHECK(run(with({"simulate", "-o", (tmp.path / "a").string()})).code == 0);
        CHECK(run(with({"simulate", "-o", (tmp.path / "b").string()})).code == 0);
        for (const char* f : {"participants.csv", "sessions.zip"}) {
            CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
        }

        const std::vector<std::string> q{"--questions", "Q1,Q2,Q3,Q3.1,Q4"};
        auto analyze = [&](std::vector<std::string> extra) {
            std::vector<std::string> args = with({"analyze"});
            args.insert(args.end(), q.begin(), q.end());
            args.insert(args.end(), extra.begin(), extra.end());
            return run(args);
        };
        const Run text1 = analyze({});
        CHECK(text1.code == 0);
        CHECK(text1.out == analyze({}).out);
        CHECK(text1.out.find("Panel A") != std::string::npos);
        const Run csv1 = analyze({"--format", "csv"});
        CHECK(csv1.out == analyze({"--format", "csv"}).out);

        // The stored dataset gives the same report as simulating in place.
        const Run stored = run({"analyze", "--dataset", (tmp.path / "a").string(), "--questions", "Q1,Q2,Q3,Q3.1,Q4"});
        CHECK(stored.code == 0);
        CHECK(stored.out == text1.out);

        const Run table = run({"analyze", "--dataset", (tmp.path / "a").string(), "--table", "weekly"});
        CHECK(table.out.rfind("participant_id,gender,age_group,week,space_error_z\r\n", 0) == 0);

        const Run q5 = run(with({"analyze", "--questions", "Q5"}));
        CHECK(q5.code == 1);
        const auto err = nlohmann::json::parse(q5.err);
        CHECK(err["error"]["kind"] == "analysis_plan");
        CHECK(err["error"]["question"] == "Q5");
        CHECK(run({"analyze", "--dataset", (tmp.path / "a").string(), "--seed", "3"}).code == 2);
        CHECK(run({"analyze", "--questions", "Q9", "--n-per-cell", "3"}).code == 1);
    }

    TEST_CASE("config and recover") {
        const Run cfg = run({"config"});
        CHECK(cfg.code == 0);
        CHECK(nlohmann::json::parse(cfg.out)["latent"]["between_person_share"] == 0.67);

        TempDir tmp;
        {
            std::ofstream(tmp.path / "bad.cfg") << R"({"latent": {"between_person_share": 2}})";
        }
        const Run bad = run({"simulate", "--config", (tmp.path / "bad.cfg").string(), "-o", (tmp.path / "x").string()});
        CHECK(bad.code == 1);
        CHECK(nlohmann::json::parse(bad.err)["error"]["kind"] == "domain");

        const std::vector<std::string> args{"recover", "--reps", "3", "--threads", "2", "--n-per-cell", "3",
                                            "--no-supervised", "--questions", "Q1"};
        const Run r1 = run(args);
        CHECK(r1.code == 0);
        CHECK(r1.out.rfind("kind,name,planted,n,rate,mean,sd,min,max,bias\r\n", 0) == 0);
        CHECK(run(args).out == r1.out);
    }

    TEST_CASE("installed binary: exit codes and error lines") {
        const std::string bin = MINISPACE_SPACE_BIN;
        CHECK(shell(bin + " --version > /dev/null") == 0);
        CHECK(shell(bin + " bogus 2> /dev/null") == 2);
        CHECK(shell(bin + " gen --week 2 --seed 9 > /dev/null") == 0);
        CHECK(shell(bin + " parse /nonexistent.json 2> /dev/null") == 2);
    }
}
