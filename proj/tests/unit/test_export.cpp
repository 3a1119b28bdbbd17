#include <doctest.h>

#include <chrono>
#include <cmath>

#include "fixtures.hpp"
#include "minispace/csv.hpp"
#include "minispace/gateway/export.hpp"
#include "minispace/rng.hpp"
#include "minispace/zip.hpp"

using namespace minispace;
using namespace minispace::gateway;

namespace {

std::vector<std::vector<std::string>> rows_of(const std::string& text) { return csv::parse(text); }

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

TEST_SUITE("export") {
    TEST_CASE("quick summary: one row per participant-week") {
        const auto batch = fixtures::small_batch();
        const ExportRequest all{ExportMode::quick_summary, quick_summary_columns()};
        const std::string text = export_csv(batch, all);
        const auto rows = rows_of(text);
        REQUIRE(rows.size() == 7);
        CHECK(rows[0] == quick_summary_columns());
        CHECK(text.find("\r\n") != std::string::npos);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto m = compute_metrics(batch[i]);
            CHECK(rows[i + 1][0] == m.participant_id);
            CHECK(rows[i + 1][1] == std::to_string(m.week));
            CHECK(std::stod(rows[i + 1][2]) == m.rotation_time_s);
            CHECK(std::stod(rows[i + 1][5]) == m.perspective_error_deg);
        }
        // Two sessions per week: each component z is +-1/sqrt(2), so the
        // composite is 0 or +-1/sqrt(2), and the pair sums to zero.
        for (int week = 0; week < 3; ++week) {
            const double a = std::stod(rows[1 + week][6]);
            const double b = std::stod(rows[4 + week][6]);
            CHECK(a + b == doctest::Approx(0.0).epsilon(1e-12));
            const double mag = std::abs(a);
            CHECK((mag < 1e-12 || std::abs(mag - std::sqrt(0.5)) < 1e-12));
        }
        // Participant P02 points 21 degrees off, P01 8 degrees.
        CHECK(std::stod(rows[1][5]) == doctest::Approx(8.0));
        CHECK(std::stod(rows[4][5]) == doctest::Approx(21.0));
    }

    TEST_CASE("header follows catalog order, not selection order") {
        const auto batch = fixtures::small_batch();
        const auto rows = rows_of(export_csv(batch, {ExportMode::quick_summary, {"space_error_z", "week", "participant_id"}}));
        CHECK(rows[0] == std::vector<std::string>{"participant_id", "week", "space_error_z"});
    }

    TEST_CASE("deselected columns vanish from header and body") {
        const auto batch = fixtures::small_batch();
        auto cols = quick_summary_columns();
        std::erase(cols, "perspective_error_deg");
        const std::string text = export_csv(batch, {ExportMode::quick_summary, cols});
        CHECK(text.find("perspective_error_deg") == std::string::npos);
        CHECK(rows_of(text)[0].size() == 6);
    }

    TEST_CASE("export is a projection") {
        const auto batch = fixtures::small_batch();
        Rng rng(2024);
        for (auto mode : {ExportMode::quick_summary, ExportMode::detailed}) {
            const auto all_cols = build_catalog(batch, mode).columns();
            const auto full = rows_of(export_csv(batch, {mode, all_cols}));
            for (int trial = 0; trial < 25; ++trial) {
                std::vector<std::string> subset;
                for (const auto& c : all_cols) {
                    if (rng.coin()) subset.push_back(c);
                }
                if (subset.empty()) subset.push_back(all_cols.back());
                const auto part = rows_of(export_csv(batch, {mode, subset}));
                REQUIRE(part.size() == full.size());
                for (std::size_t j = 0; j < part[0].size(); ++j) {
                    const std::size_t k = column(full[0], part[0][j]);
                    for (std::size_t r = 0; r < part.size(); ++r) CHECK(part[r][j] == full[r][k]);
                }
            }
        }
    }

    TEST_CASE("unknown columns are listed") {
        const auto batch = fixtures::small_batch();
        try {
            export_csv(batch, {ExportMode::quick_summary, {"week", "bogus", "sus", "bogus"}});
            FAIL("expected an unknown-column error");
        } catch (const UnknownColumnsError& e) {
            CHECK(e.columns() == std::vector<std::string>{"bogus", "sus"});
            CHECK(std::string(e.what()).find("bogus") != std::string::npos);
        }
        CHECK_THROWS_AS(export_csv(batch, {ExportMode::quick_summary, {}}), DomainError);
        CHECK_THROWS_AS(export_csv(std::vector<SessionLog>{}, {ExportMode::quick_summary, {"week"}}), DomainError);
    }

    TEST_CASE("detailed export: one row per trial") {
        const auto batch = fixtures::small_batch();
        const auto cols = build_catalog(batch, ExportMode::detailed).columns();
        const auto rows = rows_of(export_csv(batch, {ExportMode::detailed, cols}));
        std::size_t trials = 0;
        for (const auto& log : batch) trials += log.rotation_trials.size() + log.movement_trials.size() + log.perspective_trials.size();
        REQUIRE(rows.size() == trials + 1);
        const auto& h = rows[0];
        const auto task = column(h, "trial_task"), err = column(h, "perspective_trial_error_deg");
        const auto pid = column(h, "participant_id"), kind = column(h, "training_kind");
        const auto angle = column(h, "training_target_angle_deg"), sus = column(h, "sus");
        int perspective_rows = 0;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            CHECK(row[sus] == "75");  // alternating 4/2 answers
            if (row[task] == "perspective") {
                ++perspective_rows;
                CHECK(row[kind].empty());
                CHECK(std::stod(row[err]) == doctest::Approx(row[pid] == "P01" ? 8.0 : 21.0));
            } else {
                CHECK(row[err].empty());
                CHECK((row[kind] == "rotation" || row[kind] == "forward"));
                CHECK(row[angle].empty() == (row[kind] == "forward"));
            }
        }
        CHECK(perspective_rows == 2 * (6 + 6 + 16));
    }

    TEST_CASE("fields needing quotes survive a parse") {
        auto batch = fixtures::small_batch();
        for (auto& log : batch) log.device = "Tablet, \"model\" 9";
        const auto rows = rows_of(export_csv(batch, {ExportMode::detailed, {"device", "week"}}));
        CHECK(rows[0] == std::vector<std::string>{"week", "device"});
        CHECK(rows[1][1] == "Tablet, \"model\" 9");
    }

    TEST_CASE("upload ingestion: single logs and archives") {
        const auto batch = fixtures::small_batch();
        const auto single = ingest_upload("one.json", write_session(batch[0]));
        REQUIRE(single.size() == 1);
        CHECK(single[0].ok());
        CHECK(single[0].source_name == "one.json");

        const auto broken = ingest_upload("bad.json", "{\"schema_version\": ");
        REQUIRE(broken.size() == 1);
        CHECK_FALSE(broken[0].ok());
        CHECK(broken[0].error().kind == "parse");
        CHECK(entry_status_json(broken[0])["status"] == "error");

        std::vector<zip::Entry> entries;
        for (const auto& log : batch) entries.push_back({session_entry_name(log), write_session(log), ""});
        entries.push_back({"corrupt.json", "not json", ""});
        const auto mixed = ingest_upload("batch.zip", zip::write_archive(entries));
        REQUIRE(mixed.size() == 7);
        CHECK(ok_logs(mixed).size() == 6);
        CHECK(entry_status_json(mixed[0])["participant_id"] == "P01");
        CHECK(entry_status_json(mixed[6])["status"] == "error");
    }

    TEST_CASE("error objects") {
        const auto j = error_json(ValidationError({"a", "b"}));
        CHECK(j["error"]["kind"] == "validation");
        CHECK(j["error"]["failures"].size() == 2);
        CHECK(error_json(std::runtime_error("x"))["error"]["kind"] == "internal");
        CHECK(error_json(UnknownColumnsError({"q"}))["error"]["unknown_columns"][0] == "q");
    }

    TEST_CASE("400-log archive exports within the ceiling") {
        std::vector<SessionLog> logs;
        for (int p = 0; p < 134 && logs.size() < 400; ++p) {
            for (int week = 1; week <= 3 && logs.size() < 400; ++week) {
                char id[8];
                std::snprintf(id, sizeof id, "S%03d", p);
                logs.push_back(fixtures::make_log(id, week, 1000 + 3 * p + week, 5.0 + p % 17));
            }
        }
        const std::string archive = write_session_archive(logs);
        const auto start = std::chrono::steady_clock::now();
        const auto entries = ingest_upload("batch.zip", archive);
        const auto ok = ok_logs(entries);
        const std::string out = export_csv(ok, {ExportMode::quick_summary, build_catalog(ok, ExportMode::quick_summary).columns()});
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        CHECK(rows_of(out).size() == 401);
        CHECK(seconds < 5.0);
    }
}
