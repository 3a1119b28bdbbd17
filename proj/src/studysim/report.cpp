#include <algorithm>
#include <cstdio>
#include <optional>
#include <tuple>

#include "minispace/csv.hpp"
#include "minispace/studysim/analysis.hpp"

namespace minispace::sim {

namespace {

using stats::StatResult;

struct Row {
    std::string question;
    std::string analysis;
    std::string term;
    std::string method;
    std::optional<double> estimate;
    std::optional<double> std_error;
    std::optional<double> statistic;
    std::optional<double> df1;
    std::optional<double> df2;
    std::optional<double> p_value;
    std::optional<double> p_adjusted;
    std::string effect_kind;
    std::optional<double> effect_value;
    std::string notes;
};

const std::vector<std::string> kColumns{"question", "analysis",   "term",       "method",      "estimate",
                                        "std_error", "statistic", "df1",        "df2",         "p_value",
                                        "p_adjusted", "effect_kind", "effect_value", "notes"};

std::string opt(const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); }

Row from_result(std::string question, std::string analysis, std::string term, const StatResult& r) {
    Row row;
    row.question = std::move(question);
    row.analysis = std::move(analysis);
    row.term = std::move(term);
    row.method = r.method;
    row.statistic = r.statistic;
    if (!r.df.empty()) row.df1 = r.df[0];
    if (r.df.size() > 1) row.df2 = r.df[1];
    row.p_value = r.p_value;
    if (r.effect.kind != stats::EffectKind::none) {
        row.effect_kind = std::string(stats::to_string(r.effect.kind));
        row.effect_value = r.effect.value;
    }
    row.notes = r.notes;
    return row;
}

void add_art(std::vector<Row>& rows, const std::string& question, const std::string& analysis, const stats::ArtResult& art) {
    for (const auto& e : art.effects) rows.push_back(from_result(question, analysis, e.name, e.result));
    for (const auto& e : art.effects) {
        for (const auto& ph : e.posthoc) {
            Row row;
            row.question = question;
            row.analysis = analysis + " post hoc";
            row.term = e.name + ": " + ph.level_a + " - " + ph.level_b;
            row.method = "ART contrast";
            row.estimate = ph.estimate;
            row.statistic = ph.t;
            row.df1 = ph.df;
            row.p_value = ph.p;
            row.p_adjusted = ph.p_holm;
            if (ph.effect.kind != stats::EffectKind::none) {
                row.effect_kind = std::string(stats::to_string(ph.effect.kind));
                row.effect_value = ph.effect.value;
            }
            rows.push_back(std::move(row));
        }
    }
}

void add_named(std::vector<Row>& rows, const std::string& question, const std::string& analysis,
               const std::vector<NamedResult>& family) {
    for (const auto& n : family) {
        Row row = from_result(question, analysis, n.label, n.result);
        row.p_adjusted = n.p_adjusted;
        rows.push_back(std::move(row));
    }
}

void add_fit(std::vector<Row>& rows, const std::string& analysis, const stats::OlsFit& fit) {
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        Row row;
        row.question = "Q2";
        row.analysis = analysis;
        row.term = fit.names[i];
        row.method = "OLS";
        row.estimate = fit.coefficients[i];
        row.std_error = fit.std_errors[i];
        row.statistic = fit.t_values[i];
        row.df1 = fit.df_resid;
        row.p_value = fit.p_values[i];
        rows.push_back(std::move(row));
    }
    Row model;
    model.question = "Q2";
    model.analysis = analysis;
    model.term = "(model)";
    model.method = "OLS F";
    model.statistic = fit.f;
    model.df1 = fit.df_model;
    model.df2 = fit.df_resid;
    model.p_value = fit.p_model;
    model.effect_kind = std::string(stats::to_string(stats::EffectKind::r2));
    model.effect_value = fit.r2;
    model.notes = "n=" + std::to_string(fit.n());
    rows.push_back(std::move(model));
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // no "-0.00"
    return s;
}

std::string p_text(double p) {
    if (p < 0.001) return "<.001";
    std::string s = fixed(p, 3);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
}

std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string f_line(const StatResult& r) {
    std::string s = "F(" + fixed(r.df.at(0), 0) + ", " + fixed(r.df.at(1), 0) + ") = " + fixed(r.statistic, 2) +
                    ", p = " + p_text(r.p_value);
    if (r.effect.kind != stats::EffectKind::none) {
        s += ", " + std::string(stats::to_string(r.effect.kind)) + " = " + fixed(r.effect.value, 2);
    }
    return s;
}

void art_text(std::string& out, const stats::ArtResult& art) {
    for (const auto& e : art.effects) {
        out += "  " + pad(e.name, 30) + f_line(e.result) + "\n";
    }
    for (const auto& e : art.effects) {
        for (const auto& ph : e.posthoc) {
            out += "    " + pad(e.name + " " + ph.level_a + " vs " + ph.level_b, 40) + "t(" + fixed(ph.df, 0) +
                   ") = " + fixed(ph.t, 2) + ", p_holm = " + p_text(ph.p_holm);
            if (ph.effect.kind != stats::EffectKind::none) {
                out += ", " + std::string(stats::to_string(ph.effect.kind)) + " = " + fixed(ph.effect.value, 2);
            }
            out += "\n";
        }
    }
}

void panel_text(std::string& out, const RegressionPanel& panel) {
    out += "Panel " + panel.name + "\n";
    std::vector<std::string> terms = panel.baseline.names;
    for (const auto& m : panel.models) {
        for (const auto& n : m.names) {
            if (std::find(terms.begin(), terms.end(), n) == terms.end()) terms.push_back(n);
        }
    }
    constexpr std::size_t kLabel = 44, kCell = 18;
    out += pad("", kLabel) + pad("Baseline", kCell);
    for (std::size_t w = 0; w < panel.models.size(); ++w) out += pad("Week " + std::to_string(w + 1), kCell);
    out += "\n";
    auto cell = [&](const stats::OlsFit& fit, const std::string& term) -> std::string {
        for (std::size_t i = 0; i < fit.names.size(); ++i) {
            if (fit.names[i] == term) {
                return fixed(fit.coefficients[i], 2) + stars(fit.p_values[i]) + " (" + fixed(fit.std_errors[i], 2) + ")";
            }
        }
        return "-";
    };
    for (const auto& term : terms) {
        out += pad(term, kLabel) + pad(cell(panel.baseline, term), kCell);
        for (const auto& m : panel.models) out += pad(cell(m, term), kCell);
        out += "\n";
    }
    out += pad("R2", kLabel) + pad(fixed(panel.baseline.r2, 2), kCell);
    for (const auto& m : panel.models) out += pad(fixed(m.r2, 2), kCell);
    out += "\n";
    out += "Model comparisons (" + panel.name + ")\n";
    out += pad("Comparison", 24) + pad("dR2", 8) + pad("F", 8) + pad("(df1, df2)", 12) + pad("p", 8) + "p_holm\n";
    for (const auto& c : panel.comparisons) {
        out += pad(c.label, 24) + pad(fixed(c.result.effect.value, 2), 8) + pad(fixed(c.result.statistic, 2), 8) +
               pad("(" + fixed(c.result.df.at(0), 0) + ", " + fixed(c.result.df.at(1), 0) + ")", 12) +
               pad(p_text(c.result.p_value), 8) + p_text(c.p_adjusted) + "\n";
    }
}

}  // namespace

std::string report_csv(const StudyReport& report) {
    std::vector<Row> rows;
    if (report.q1) {
        add_named(rows, "Q1", "spearman", report.q1->spearman);
        const auto& icc = report.q1->icc;
        const double n = static_cast<double>(icc.n), k = static_cast<double>(icc.k);
        auto icc_row = [&](const std::string& term, double value, const stats::Interval& ci) {
            Row row;
            row.question = "Q1";
            row.analysis = "icc";
            row.term = term;
            row.method = "two-way random, absolute agreement";
            row.estimate = value;
            row.statistic = icc.f_rows;
            row.df1 = n - 1;
            row.df2 = (n - 1) * (k - 1);
            row.p_value = icc.p_rows;
            row.notes = "95% CI [" + csv::format_number(ci.lower) + ", " + csv::format_number(ci.upper) + "]";
            rows.push_back(std::move(row));
        };
        icc_row("ICC(2,1)", icc.icc_single, icc.ci_single);
        icc_row("ICC(2,k)", icc.icc_average, icc.ci_average);
        for (const auto& [term, value, flag] :
             std::vector<std::tuple<std::string, double, bool>>{{"var_subject", icc.var_subject, icc.subject_truncated},
                                                                 {"var_session", icc.var_session, icc.session_truncated},
                                                                 {"var_residual", icc.var_residual, false},
                                                                 {"between_person_share", icc.between_person_share, false},
                                                                 {"between_person_share_excl_session",
                                                                  icc.between_person_share_excl_session, false}}) {
            Row row;
            row.question = "Q1";
            row.analysis = "variance components";
            row.term = term;
            row.method = "ANOVA moments";
            row.estimate = value;
            if (flag) row.notes = "truncated at zero";
            rows.push_back(std::move(row));
        }
        add_art(rows, "Q1", "week art", report.q1->week_art);
    }
    for (const auto& panel : report.q2) {
        const std::string prefix = "panel " + panel.name;
        add_fit(rows, prefix + " baseline", panel.baseline);
        for (std::size_t w = 0; w < panel.models.size(); ++w) {
            add_fit(rows, prefix + " week " + std::to_string(w + 1), panel.models[w]);
        }
        add_named(rows, "Q2", prefix + " comparisons", panel.comparisons);
    }
    for (const auto& b : report.q3) {
        Row row = from_result("Q3", "benchmark", b.measure + " week " + std::to_string(b.week), b.result);
        row.estimate = b.result.z;
        row.p_adjusted = b.p_adjusted;
        row.notes = "benchmark " + csv::format_number(b.benchmark) + (b.result.notes.empty() ? "" : "; " + b.result.notes);
        rows.push_back(std::move(row));
    }
    for (const auto& m : questionnaire_measures()) {
        if (const auto it = report.q3_1.find(m); it != report.q3_1.end()) add_art(rows, "Q3.1", "week art " + m, it->second);
    }
    if (report.q4) add_art(rows, "Q4", "mixed art", *report.q4);
    if (report.q5) {
        add_art(rows, "Q5", "factorial art", report.q5->art);
        add_named(rows, "Q5", "supervision by age group", report.q5->supervision_by_age);
    }
    for (const auto& m : questionnaire_measures()) {
        if (const auto it = report.q6.find(m); it != report.q6.end()) add_art(rows, "Q6", "factorial art " + m, it->second);
    }

    std::string out;
    csv::append_row(out, kColumns);
    for (const auto& r : rows) {
        csv::append_row(out, {r.question, r.analysis, r.term, r.method, opt(r.estimate), opt(r.std_error), opt(r.statistic),
                              opt(r.df1), opt(r.df2), opt(r.p_value), opt(r.p_adjusted), r.effect_kind,
                              opt(r.effect_value), r.notes});
    }
    return out;
}

std::string report_text(const StudyReport& report) {
    std::string out = "Study report (analysis " + report.analysis_version + ")\n";
    out += "Participants: " + std::to_string(report.n_unsupervised) + " unsupervised, " +
           std::to_string(report.n_supervised) + " supervised\n";
    if (report.q1) {
        out += "\nQ1 Test-retest reliability\n";
        for (const auto& s : report.q1->spearman) {
            out += "  " + pad(s.label, 30) + "rho = " + fixed(s.result.effect.value, 2) + ", p_holm = " + p_text(s.p_adjusted) + "\n";
        }
        const auto& icc = report.q1->icc;
        out += "  ICC(2,1) = " + fixed(icc.icc_single, 2) + ", 95% CI [" + fixed(icc.ci_single.lower, 2) + ", " +
               fixed(icc.ci_single.upper, 2) + "]\n";
        out += "  ICC(2,k) = " + fixed(icc.icc_average, 2) + ", 95% CI [" + fixed(icc.ci_average.lower, 2) + ", " +
               fixed(icc.ci_average.upper, 2) + "]\n";
        out += "  Between-person share = " + fixed(icc.between_person_share, 2) + "\n";
        art_text(out, report.q1->week_art);
    }
    if (!report.q2.empty()) {
        out += "\nQ2 Linear regression models predicting MoCA\n";
        for (const auto& panel : report.q2) panel_text(out, panel);
        out += "Entries are coefficients with standard errors in parentheses. * p < .05, ** p < .01, *** p < .001\n";
    }
    if (!report.q3.empty()) {
        out += "\nQ3 Usability against benchmarks (one-sample Wilcoxon)\n";
        for (const auto& b : report.q3) {
            out += "  " + pad(b.measure + " week " + std::to_string(b.week), 30) + "vs " + csv::format_number(b.benchmark) +
                   ": Z = " + fixed(b.result.z.value_or(0.0), 2) + ", p_holm = " + p_text(b.p_adjusted) +
                   ", r = " + fixed(b.result.effect.value, 2) + "\n";
        }
    }
    if (!report.q3_1.empty()) {
        out += "\nQ3.1 Usability across weeks (ART)\n";
        for (const auto& m : questionnaire_measures()) {
            if (const auto it = report.q3_1.find(m); it != report.q3_1.end()) {
                out += " " + m + "\n";
                art_text(out, it->second);
            }
        }
    }
    if (report.q4) {
        out += "\nQ4 Gender x Age Group x Week (mixed ART)\n";
        art_text(out, *report.q4);
    }
    if (report.q5) {
        out += "\nQ5 Gender x Supervision x Age Group (ART)\n";
        art_text(out, report.q5->art);
        for (const auto& s : report.q5->supervision_by_age) {
            out += "    " + pad(s.label, 40) + "delta = " + fixed(s.result.effect.value, 2) + ", p_holm = " + p_text(s.p_adjusted) + "\n";
        }
    }
    if (!report.q6.empty()) {
        out += "\nQ6 Usability by Gender x Supervision x Age Group (ART)\n";
        for (const auto& m : questionnaire_measures()) {
            if (const auto it = report.q6.find(m); it != report.q6.end()) {
                out += " " + m + "\n";
                art_text(out, it->second);
            }
        }
    }
    return out;
}

}  // namespace minispace::sim
