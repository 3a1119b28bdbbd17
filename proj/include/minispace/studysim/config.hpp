#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace minispace::sim {

enum class AgeGroup { young, middle, old };
enum class Gender { female, male };
enum class Education { high_school, university };
enum class Condition { unsupervised, supervised };

inline constexpr std::array<AgeGroup, 3> kAgeGroups{AgeGroup::young, AgeGroup::middle, AgeGroup::old};

std::string_view to_string(AgeGroup g);  // "20-40", "41-60", "61-90"
std::string_view to_string(Gender g);    // "female", "male"
std::string_view to_string(Education e); // "high_school", "university"
std::string_view to_string(Condition c); // "unsupervised", "supervised"
AgeGroup parse_age_group(std::string_view s);
Gender parse_gender(std::string_view s);
Education parse_education(std::string_view s);
Condition parse_condition(std::string_view s);
/// Throws DomainError outside 20-90.
AgeGroup age_group_for_age(int age);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

/// targets[age group][week - 1]
using WeeklyTargets = std::array<std::array<MeanSd, 3>, 3>;

struct CellSpec {
    AgeGroup age_group = AgeGroup::young;
    Gender gender = Gender::female;
    int n = 0;
    double age_mean = 30.0;
    double age_sd = 5.0;
    int age_min = 20;
    int age_max = 40;
};

/// A supervised proxy study; its participants play one week-1 style session.
struct SupervisedStudy {
    std::string name;
    int n_female = 0;
    int n_male = 0;
    double age_mean = 70.0;
    double age_sd = 7.0;
    int age_min = 60;
    int age_max = 90;
    bool questionnaires = false;
};

/// Multipliers on the structure of the targets: 1 reproduces them, 0 removes
/// the effect (every group takes the young targets, later weeks take week 1).
struct EffectScales {
    double age = 1.0;
    double learning = 1.0;    // week 1 -> week 2
    double difficulty = 1.0;  // week 1 -> week 3
};

struct QuestionnaireMeasure {
    WeeklyTargets targets{};
    double gender_shift = 0.0;      // female minus male, in target SD units
    double supervised_shift = 0.0;  // supervised minus unsupervised, in target SD units
};

struct QuestionnaireModel {
    QuestionnaireMeasure sus;
    QuestionnaireMeasure nasa_tlx;
    QuestionnaireMeasure ueq_attractiveness;
    QuestionnaireMeasure ueq_pragmatic;
    QuestionnaireMeasure ueq_hedonic;
    double person_share = 0.5;  // share of weekly variance that is stable within person
};

/// MoCA = intercept + age*years + male + university + slope * z_ref + noise,
/// rounded and clamped to [0, 30]. z_ref is the participant's standardized
/// SPACE error in the reference week (the only session for supervised
/// proxies).
struct MocaModel {
    double intercept = 26.48;
    double age = 0.01;
    double male = -0.99;
    double university = 0.15;
    double slope = -1.24;
    int reference_week = 3;
    double noise_sd = 2.7;
};

struct CohortConfig {
    std::string name = "mini-SPACE";
    std::uint64_t seed = 1;
    std::optional<int> n_per_cell;  // overrides every cell's n when set
    std::vector<CellSpec> cells;
    double university_share = 0.69;

    WeeklyTargets rotation_time_s{};
    WeeklyTargets movement_time_s{};
    WeeklyTargets perspective_error_deg{};
    EffectScales effects;

    double between_person_share = 0.67;  // target ICC(2,1) of weekly SPACE error
    double loading = 0.7;                // loading of each component on weekly performance
    double gender_shift = 0.15;          // latent shift for female participants (SD units)
    std::array<double, 3> supervision_shift{0.0, 0.0, -0.45};  // supervised minus unsupervised, by age group
    double noise_scale = 1.0;            // multiplies every random deviation; 0 gives cell-identical data
    bool balanced = true;                // exact sample moments for the unsupervised cohort's latent draws

    bool supervised_enabled = true;
    std::vector<SupervisedStudy> supervised;

    MocaModel moca;
    QuestionnaireModel questionnaires;

    /// The bundled defaults (data/study_default.json).
    static const CohortConfig& defaults();
    /// Missing keys keep their default values. Throws DomainError.
    static CohortConfig from_json(const nlohmann::json& doc);
    nlohmann::ordered_json to_json() const;
    /// Throws DomainError naming the first invalid field.
    void validate() const;

    int cell_size(const CellSpec& cell) const { return n_per_cell.value_or(cell.n); }
    /// Target after applying the effect scales.
    MeanSd target(const WeeklyTargets& t, AgeGroup g, int week) const;
};

/// Same cohort layout with every planted effect removed: effect scales and
/// shifts zero, MoCA slope zero, flat questionnaire targets.
CohortConfig null_config(const CohortConfig& base);

}  // namespace minispace::sim
