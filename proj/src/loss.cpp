#include "loss.hpp"

#include "errors.hpp"

namespace canopy {

using nlohmann::json;

void LossWeights::validate() const {
    if (lateral < 0.0 || sobel < 0.0 || mask < 0.0)
        throw DomainError("loss weights must be >= 0");
}

namespace {

double squared_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

LossBreakdown total_loss(const HistogramSet& obs, const HistogramSet& pred, const LossWeights& w) {
    w.validate();
    if (obs.depth_spec != pred.depth_spec || obs.lateral_spec != pred.lateral_spec ||
        obs.sobel_spec != pred.sobel_spec)
        throw DomainError("total_loss: histogram specs of obs and pred do not match");
    if (obs.depth_hist.size() != pred.depth_hist.size() ||
        obs.lateral_hist.size() != pred.lateral_hist.size() ||
        obs.sobel_hist.size() != pred.sobel_hist.size())
        throw DomainError("total_loss: histogram lengths of obs and pred do not match");

    LossBreakdown b;
    b.depth = squared_l2(obs.depth_hist, pred.depth_hist);
    b.lateral = squared_l2(obs.lateral_hist, pred.lateral_hist);
    b.sobel = squared_l2(obs.sobel_hist, pred.sobel_hist);

    double norm_obs = w.mask_normalizer > 0.0 ? w.mask_normalizer
                                              : static_cast<double>(obs.total_pixels);
    double norm_pred = w.mask_normalizer > 0.0 ? w.mask_normalizer
                                               : static_cast<double>(pred.total_pixels);
    if (!(norm_obs > 0.0) || !(norm_pred > 0.0))
        throw DomainError("total_loss: mask normalizer is not positive");
    double diff = obs.mask_area / norm_obs - pred.mask_area / norm_pred;
    b.mask = diff * diff;

    b.total = b.depth + w.lateral * b.lateral + w.sobel * b.sobel + w.mask * b.mask;
    return b;
}

json loss_weights_to_json(const LossWeights& w) {
    return json{{"lateral", w.lateral},
                {"sobel", w.sobel},
                {"mask", w.mask},
                {"mask_normalizer", w.mask_normalizer}};
}

LossWeights loss_weights_from_json(const json& j) {
    LossWeights w;
    try {
        if (j.contains("species"))
            w = j.at("species").get<std::string>() == "maize" ? LossWeights::maize_defaults()
                                                              : LossWeights::soybean_defaults();
        w.lateral = j.value("lateral", w.lateral);
        w.sobel = j.value("sobel", w.sobel);
        w.mask = j.value("mask", w.mask);
        w.mask_normalizer = j.value("mask_normalizer", w.mask_normalizer);
    } catch (const json::exception& e) {
        throw DataError(std::string("loss weights JSON: ") + e.what());
    }
    w.validate();
    return w;
}

json loss_breakdown_to_json(const LossBreakdown& b) {
    return json{{"depth", b.depth},
                {"lateral", b.lateral},
                {"sobel", b.sobel},
                {"mask", b.mask},
                {"total", b.total}};
}

}  // namespace canopy
