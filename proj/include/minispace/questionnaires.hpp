#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minispace/sessionlog.hpp"

namespace minispace {

struct QuestionnaireScores {
    double sus = 0.0;       // 0-100
    double nasa_tlx = 0.0;  // 0-100, raw (unweighted) TLX
    double ueq_attractiveness = 0.0;
    double ueq_pragmatic = 0.0;
    double ueq_hedonic = 0.0;

    friend bool operator==(const QuestionnaireScores&, const QuestionnaireScores&) = default;
};

/// The six UEQ base scales.
enum class UeqScale { attractiveness, perspicuity, efficiency, dependability, stimulation, novelty };

std::string_view to_string(UeqScale scale);

struct UeqKeyItem {
    UeqScale scale = UeqScale::attractiveness;
    int polarity = 1;  // +1: higher raw value is the positive pole
};

/// Item-to-scale and polarity assignment for the 26 UEQ items.
struct UeqKey {
    std::array<UeqKeyItem, 26> items{};

    /// The shipped key (data/ueq_key.json).
    static const UeqKey& standard();
    /// Throws DomainError for a malformed key document.
    static UeqKey from_json(const nlohmann::json& doc);

    /// Same assignment with every polarity flipped.
    UeqKey flipped() const;
};

/// SUS total; items are 1-based, odd items positively worded.
double score_sus(std::span<const int> items);

/// Raw NASA-TLX: unweighted mean of the six subscales.
double score_nasa_tlx(std::span<const double> items);
double score_nasa_tlx(std::span<const int> items);

struct UeqScores {
    double attractiveness = 0.0;
    double pragmatic = 0.0;  // mean over perspicuity, efficiency and dependability items
    double hedonic = 0.0;    // mean over stimulation and novelty items
};

UeqScores score_ueq(std::span<const int> items, const UeqKey& key = UeqKey::standard());

QuestionnaireScores score_questionnaires(const QuestionnaireResponses& responses, const UeqKey& key = UeqKey::standard());

}  // namespace minispace
