// Thin Python layer over the C++ core. Structured values cross the boundary
// as JSON text and are decoded on the Python side.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "minispace/angles.hpp"
#include "minispace/gateway/cli.hpp"
#include "minispace/gateway/export.hpp"
#include "minispace/metrics.hpp"
#include "minispace/questionnaires.hpp"
#include "minispace/sessionlog.hpp"
#include "minispace/stats/icc.hpp"
#include "minispace/stats/nonparametric.hpp"
#include "minispace/taskgen.hpp"

namespace py = pybind11;
using namespace minispace;
using nlohmann::json;

namespace {

json stat_json(const stats::StatResult& r) {
    json out{{"method", r.method},
             {"statistic", r.statistic},
             {"df", r.df},
             {"p_value", r.p_value},
             {"effect_kind", std::string(stats::to_string(r.effect.kind))},
             {"effect", r.effect.value},
             {"notes", r.notes}};
    if (r.z) out["z"] = *r.z;
    return out;
}

json metrics_json(const MetricRecord& m) {
    json out{{"participant_id", m.participant_id},
             {"week", m.week},
             {"rotation_time_s", m.rotation_time_s},
             {"movement_time_s", m.movement_time_s},
             {"total_training_time_s", m.total_training_time_s},
             {"perspective_error_deg", m.perspective_error_deg}};
    if (m.space_error_z) out["space_error_z"] = *m.space_error_z;
    return out;
}

std::vector<SessionLog> logs_from_upload(const std::string& name, const py::bytes& data) {
    const auto entries = gateway::ingest_upload(name, std::string(data));
    return gateway::ok_logs(entries);
}

}  // namespace

PYBIND11_MODULE(_minispace, m) {
    m.doc() = "mini-SPACE core bindings";

    // Library errors surface as minispace.MinispaceError(kind, message, details).
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto detail = gateway::error_json(e)["error"];
            py::object cls = py::module_::import("minispace").attr("MinispaceError");
            py::object decoded = py::module_::import("json").attr("loads")(detail.dump());
            py::object inst = cls(e.kind(), std::string(e.what()), decoded);
            PyErr_SetObject(cls.ptr(), inst.ptr());
        }
    });

    m.def("angular_deviation", &angular_deviation, py::arg("estimate_deg"), py::arg("truth_deg"));
    m.def("wrap_degrees", &wrap_degrees, py::arg("deg"));

    m.def(
        "generate_plan_json",
        [](int week, std::uint64_t seed, std::optional<int> pairs) {
            PlanConfig config;
            if (pairs) config.n_pairs = *pairs;
            return plan_to_json(generate_plan(week, seed, config)).dump();
        },
        py::arg("week"), py::arg("seed"), py::arg("n_pairs") = py::none());

    m.def(
        "canonical_session_json", [](const std::string& text) { return write_session(read_session(text)); },
        py::arg("text"));
    m.def(
        "validate_session", [](const std::string& text) { return validate_session(read_session(text)); },
        py::arg("text"));
    m.def(
        "session_metrics_json", [](const std::string& text) { return metrics_json(compute_metrics(read_session(text))).dump(); },
        py::arg("text"));

    m.def("score_sus", [](const std::vector<int>& items) { return score_sus(items); }, py::arg("items"));
    m.def("score_nasa_tlx", [](const std::vector<double>& items) { return score_nasa_tlx(items); }, py::arg("items"));
    m.def(
        "score_ueq",
        [](const std::vector<int>& items) {
            const auto s = score_ueq(items);
            return std::map<std::string, double>{
                {"attractiveness", s.attractiveness}, {"pragmatic", s.pragmatic}, {"hedonic", s.hedonic}};
        },
        py::arg("items"));

    m.def("spearman_brown", &stats::spearman_brown, py::arg("icc_single"), py::arg("k"));
    m.def(
        "icc_two_way",
        [](const std::vector<std::vector<double>>& rows) {
            const auto r = stats::icc_two_way(rows);
            return std::map<std::string, double>{{"icc_single", r.icc_single}, {"icc_average", r.icc_average},
                                                 {"ms_rows", r.ms_rows},       {"ms_cols", r.ms_cols},
                                                 {"ms_error", r.ms_error}};
        },
        py::arg("rows"));
    m.def(
        "wilcoxon_json",
        [](const std::vector<double>& x, double benchmark) { return stat_json(stats::wilcoxon_signed_rank(x, benchmark)).dump(); },
        py::arg("x"), py::arg("benchmark"));
    m.def(
        "spearman_json",
        [](const std::vector<double>& x, const std::vector<double>& y) { return stat_json(stats::spearman_rho(x, y)).dump(); },
        py::arg("x"), py::arg("y"));
    m.def("holm_adjust", [](const std::vector<double>& p) { return stats::holm_adjust(p); }, py::arg("p"));

    m.def(
        "catalog_json",
        [](const std::string& name, const py::bytes& data, const std::string& mode) {
            return gateway::catalog_to_json(gateway::build_catalog(logs_from_upload(name, data), gateway::parse_mode(mode))).dump();
        },
        py::arg("name"), py::arg("data"), py::arg("mode"));
    m.def(
        "export_csv",
        [](const std::string& name, const py::bytes& data, const std::string& mode,
           std::optional<std::vector<std::string>> columns) {
            const auto logs = logs_from_upload(name, data);
            const auto parsed = gateway::parse_mode(mode);
            const auto cols = columns ? *columns : gateway::build_catalog(logs, parsed).columns();
            return gateway::export_csv(logs, {parsed, cols});
        },
        py::arg("name"), py::arg("data"), py::arg("mode"), py::arg("columns") = py::none());

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "space");
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = gateway::run_cli(args, out, err);
            }
            return py::make_tuple(code, py::bytes(out.str()), py::bytes(err.str()));
        },
        py::arg("args"));
}
