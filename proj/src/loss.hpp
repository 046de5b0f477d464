#pragma once

#include <nlohmann/json.hpp>

#include "histograms.hpp"

namespace canopy {

struct LossWeights {
    double lateral = 2.0;
    double sobel = 4.0;
    double mask = 1.0;
    // mask areas are divided by this before squaring; <= 0 uses each set's
    // own pixel count, keeping the term resolution-independent
    double mask_normalizer = 0.0;

    static LossWeights soybean_defaults() { return {2.0, 4.0, 1.0, 0.0}; }
    static LossWeights maize_defaults() { return {1.0, 0.0, 1.0, 0.0}; }
    void validate() const;
};

struct LossBreakdown {
    double depth = 0.0;
    double lateral = 0.0;
    double sobel = 0.0;
    double mask = 0.0;
    double total = 0.0;
};

// Squared-L2 histogram distances plus the normalized mask-area term,
// weighted into a single scalar.
LossBreakdown total_loss(const HistogramSet& obs, const HistogramSet& pred, const LossWeights& w);

nlohmann::json loss_weights_to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const nlohmann::json& j);
nlohmann::json loss_breakdown_to_json(const LossBreakdown& b);

}  // namespace canopy
