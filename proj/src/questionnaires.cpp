#include "minispace/questionnaires.hpp"

#include <cmath>
#include <set>

#include "embedded_data.hpp"
#include "minispace/error.hpp"

namespace minispace {

namespace {

constexpr std::array<std::string_view, 6> kScaleNames{"attractiveness", "perspicuity",  "efficiency",
                                                      "dependability",  "stimulation", "novelty"};

UeqScale scale_from(std::string_view name) {
    for (std::size_t i = 0; i < kScaleNames.size(); ++i) {
        if (kScaleNames[i] == name) return static_cast<UeqScale>(i);
    }
    throw DomainError("UEQ key: unknown scale '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(UeqScale scale) { return kScaleNames[static_cast<std::size_t>(scale)]; }

const UeqKey& UeqKey::standard() {
    static const UeqKey key = from_json(nlohmann::json::parse(embedded::ueq_key_json()));
    return key;
}

UeqKey UeqKey::from_json(const nlohmann::json& doc) {
    UeqKey key;
    try {
        const auto& items = doc.at("items");
        if (!items.is_array() || items.size() != 26) throw DomainError("UEQ key: expected 26 items");
        std::set<int> seen;
        std::array<int, 6> per_scale{};
        for (const auto& item : items) {
            const int number = item.at("item").get<int>();
            if (number < 1 || number > 26 || !seen.insert(number).second) {
                throw DomainError("UEQ key: item numbers must be 1..26 without repeats");
            }
            const int polarity = item.at("polarity").get<int>();
            if (polarity != 1 && polarity != -1) throw DomainError("UEQ key: polarity must be +1 or -1");
            const UeqScale scale = scale_from(item.at("scale").get<std::string>());
            ++per_scale[static_cast<std::size_t>(scale)];
            key.items[static_cast<std::size_t>(number - 1)] = {scale, polarity};
        }
        for (std::size_t s = 0; s < per_scale.size(); ++s) {
            if (per_scale[s] == 0) throw DomainError("UEQ key: scale '" + std::string(kScaleNames[s]) + "' has no items");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("UEQ key: ") + e.what());
    }
    return key;
}

UeqKey UeqKey::flipped() const {
    UeqKey out = *this;
    for (auto& item : out.items) item.polarity = -item.polarity;
    return out;
}

double score_sus(std::span<const int> items) {
    if (items.size() != 10) throw DomainError("SUS requires exactly 10 items, got " + std::to_string(items.size()));
    int total = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const int v = items[i];
        if (v < 1 || v > 5) throw DomainError("SUS item " + std::to_string(i + 1) + " out of range 1-5");
        // index 0 is item 1 (odd, positively worded)
        total += (i % 2 == 0) ? v - 1 : 5 - v;
    }
    return total * 2.5;
}

double score_nasa_tlx(std::span<const double> items) {
    if (items.size() != 6) throw DomainError("NASA-TLX requires exactly 6 items, got " + std::to_string(items.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!(items[i] >= 0.0 && items[i] <= 100.0)) {
            throw DomainError("NASA-TLX item " + std::to_string(i + 1) + " out of range 0-100");
        }
        sum += items[i];
    }
    return sum / 6.0;
}

double score_nasa_tlx(std::span<const int> items) {
    std::vector<double> v(items.begin(), items.end());
    return score_nasa_tlx(std::span<const double>(v));
}

UeqScores score_ueq(std::span<const int> items, const UeqKey& key) {
    if (items.size() != 26) throw DomainError("UEQ requires exactly 26 items, got " + std::to_string(items.size()));
    double attractiveness = 0.0, pragmatic = 0.0, hedonic = 0.0;
    int n_attr = 0, n_prag = 0, n_hed = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] < 1 || items[i] > 7) throw DomainError("UEQ item " + std::to_string(i + 1) + " out of range 1-7");
        const auto& k = key.items[i];
        if (k.polarity != 1 && k.polarity != -1) throw DomainError("UEQ key: polarity must be +1 or -1");
        const double v = static_cast<double>((items[i] - 4) * k.polarity);
        switch (k.scale) {
            case UeqScale::attractiveness: attractiveness += v; ++n_attr; break;
            case UeqScale::perspicuity:
            case UeqScale::efficiency:
            case UeqScale::dependability: pragmatic += v; ++n_prag; break;
            case UeqScale::stimulation:
            case UeqScale::novelty: hedonic += v; ++n_hed; break;
        }
    }
    if (n_attr == 0 || n_prag == 0 || n_hed == 0) throw DomainError("UEQ key leaves a subscale without items");
    return {attractiveness / n_attr, pragmatic / n_prag, hedonic / n_hed};
}

QuestionnaireScores score_questionnaires(const QuestionnaireResponses& responses, const UeqKey& key) {
    const UeqScores ueq = score_ueq(responses.ueq, key);
    return {score_sus(responses.sus), score_nasa_tlx(std::span<const int>(responses.nasa_tlx)), ueq.attractiveness,
            ueq.pragmatic, ueq.hedonic};
}

}  // namespace minispace
