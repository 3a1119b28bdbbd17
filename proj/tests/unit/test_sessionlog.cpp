#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "minispace/error.hpp"
#include "minispace/rng.hpp"
#include "minispace/sessionlog.hpp"
#include "minispace/zip.hpp"

using namespace minispace;

namespace {

bool mentions(const std::vector<std::string>& failures, const std::string& needle) {
    return std::any_of(failures.begin(), failures.end(),
                       [&](const std::string& f) { return f.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("sessionlog") {
    TEST_CASE("fixture logs are valid") {
        for (int week : {1, 2, 3}) {
            const auto log = fixtures::make_log("P001", week, 100 + week);
            CHECK(validate_session(log).empty());
            CHECK(sampling_warnings(log).empty());
        }
    }

    TEST_CASE("write then read is the identity") {
        for (int week : {1, 2, 3}) {
            const auto log = fixtures::make_log("P042", week, 9 + week);
            const auto text = write_session(log);
            CHECK(text.back() == '\n');
            const auto back = read_session(text);
            CHECK(back == log);
            CHECK(write_session(back) == text);
        }
    }

    TEST_CASE("canonical form: equal logs give identical bytes") {
        auto a = fixtures::make_log("P1", 1, 5);
        auto b = a;
        b.rotation_trials[0].end_t_s += 1e-9;  // below the 6-decimal resolution
        CHECK(write_session(a) == write_session(b));
        CHECK(canonical_number(0.1234564) == 0.123456);
        CHECK(canonical_number(-0.0000001) == 0.0);
    }

    TEST_CASE("unknown keys survive a rewrite") {
        const auto log = fixtures::make_log("P1", 1, 5);
        auto doc = nlohmann::json::parse(write_session(log));
        doc["firmware"] = "2.3.1";
        const auto back = read_session(doc.dump());
        CHECK(back.extensions.at("firmware") == "2.3.1");
        CHECK(write_session(back).find("\"firmware\"") != std::string::npos);
    }

    TEST_CASE("malformed documents give a parse error with offset") {
        const auto text = write_session(fixtures::make_log("P1", 1, 5));
        try {
            read_session(text.substr(0, text.size() / 2));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset() > 0);
            CHECK(e.kind() == "parse");
        }
        CHECK_THROWS_AS(read_session(""), ParseError);
        CHECK_THROWS_AS(read_session("{"), ParseError);
    }

    TEST_CASE("unsupported version") {
        auto doc = nlohmann::json::parse(write_session(fixtures::make_log("P1", 1, 5)));
        doc["schema_version"] = "2.0";
        CHECK_THROWS_AS(read_session(doc.dump()), VersionError);
    }

    TEST_CASE("five perspective trials in week 1 names the count rule") {
        auto log = fixtures::make_log("P1", 1, 5);
        log.perspective_trials.pop_back();
        const auto failures = validate_session(log);
        CHECK(mentions(failures, "perspective_trials.count"));
        auto doc = nlohmann::json::parse(write_session(fixtures::make_log("P1", 1, 5)));
        doc["perspective_trials"].erase(doc["perspective_trials"].size() - 1);
        try {
            read_session(doc.dump());
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(mentions(e.failures(), "perspective_trials.count"));
        }
    }

    TEST_CASE("every failed rule is listed") {
        auto doc = nlohmann::json::parse(write_session(fixtures::make_log("P1", 1, 5)));
        doc["week"] = 7;
        doc["started_at"] = "yesterday";
        doc["perspective_trials"][0]["response_deg"] = 400;
        doc["rotation_trials"][1]["end_t_s"] = -1;
        doc.erase("device");
        try {
            read_session(doc.dump());
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const auto& f = e.failures();
            CHECK(mentions(f, "week"));
            CHECK(mentions(f, "started_at"));
            CHECK(mentions(f, "response_deg"));
            CHECK(mentions(f, "rotation_trials[1]"));
            CHECK(mentions(f, "device"));
        }
    }

    TEST_CASE("writer rejects NaN heading") {
        auto log = fixtures::make_log("P1", 1, 5);
        log.rotation_trials[0].samples[0].heading_deg = NAN;
        CHECK_THROWS_AS(write_session(log), ValidationError);
    }

    TEST_CASE("perspective landmark ids must be in the map") {
        auto log = fixtures::make_log("P1", 1, 5);
        std::get<PerspectivePayload>(log.perspective_trials[2].payload).point_to = "volcano";
        CHECK(mentions(validate_session(log), "volcano"));
    }

    TEST_CASE("sampling gaps are warnings, not errors") {
        auto log = fixtures::make_log("P1", 1, 5);
        auto& samples = log.rotation_trials[0].samples;
        samples.erase(samples.begin() + 1, samples.begin() + 4);
        CHECK(validate_session(log).empty());
        CHECK_FALSE(sampling_warnings(log).empty());
    }

    TEST_CASE("missing questionnaires block is fine") {
        const auto log = fixtures::make_log("P1", 2, 5, 10.0, false);
        CHECK(validate_session(log).empty());
        CHECK(read_session(write_session(log)) == log);
    }

    TEST_CASE("fuzzed input never crashes") {
        const auto text = write_session(fixtures::make_log("P1", 3, 5));
        Rng rng(4242);
        int structured = 0;
        for (int i = 0; i < 600; ++i) {
            std::string mutated = text;
            const int edits = 1 + static_cast<int>(rng.below(8));
            for (int k = 0; k < edits; ++k) {
                const auto pos = rng.below(mutated.size());
                switch (rng.below(3)) {
                    case 0: mutated[pos] = static_cast<char>(rng.below(256)); break;
                    case 1: mutated.erase(pos, 1 + rng.below(20)); break;
                    default: mutated.insert(pos, 1, "{}[]\",:0-e."[rng.below(11)]); break;
                }
            }
            try {
                (void)read_session(mutated);
                ++structured;
            } catch (const Error&) {
                ++structured;
            }
        }
        CHECK(structured == 600);
    }

    TEST_CASE("archive ingestion keeps order and isolates failures") {
        std::vector<zip::Entry> entries;
        for (int i = 0; i < 3; ++i) {
            const auto log = fixtures::make_log("P00" + std::to_string(i), 1, 20 + i);
            entries.push_back({session_entry_name(log), write_session(log), ""});
        }
        entries.insert(entries.begin() + 1, zip::Entry{"broken_w1.json", "{\"schema_version\": ", ""});
        entries.push_back({"README.txt", "not a log", ""});
        const auto results = ingest_archive(zip::write_archive(entries));
        REQUIRE(results.size() == 4);
        CHECK(results[0].ok());
        CHECK_FALSE(results[1].ok());
        CHECK(results[1].source_name == "broken_w1.json");
        CHECK(results[1].error().kind == "parse");
        CHECK(results[2].ok());
        CHECK(results[3].ok());
        CHECK(results[2].log().participant_id == "P001");
        CHECK(results[0].source_name == "P000_w1.json");
    }

    TEST_CASE("archive helpers") {
        CHECK(ingest_archive(zip::write_archive({})).empty());
        CHECK_THROWS_AS(ingest_archive("plain text"), FormatError);
        std::vector<SessionLog> logs{fixtures::make_log("A", 1, 1), fixtures::make_log("A", 2, 2)};
        const auto archive = write_session_archive(logs);
        CHECK(archive == write_session_archive(logs));
        const auto results = ingest_archive(archive, 2);
        REQUIRE(results.size() == 2);
        CHECK(results[1].log() == logs[1]);
    }
}

TEST_SUITE("sessionlog") {
    TEST_CASE("non-canonical numbers read back rounded") {
        auto log = fixtures::make_log("P100", 1, 3);
        std::get<PerspectivePayload>(log.perspective_trials[0].payload).response_deg = 12.3456789;
        const auto back = read_session(write_session(log));
        CHECK(std::get<PerspectivePayload>(back.perspective_trials[0].payload).response_deg == 12.345679);
        CHECK(canonicalized(log) == back);
    }
}
