#include "reslab/scoring.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace reslab {

namespace {

// Positives and negatives both sorted descending.
double ap_sorted(std::span<const float> pos, std::span<const float> neg) {
    require(!pos.empty(), ErrorCode::kNoPositives, "average precision: no positive pixels");
    double numerator = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < pos.size()) {
        const float s = pos[i];
        std::size_t group = 0;
        while (i < pos.size() && pos[i] == s) {
            ++group;
            ++i;
        }
        tp += group;
        while (fp < neg.size() && neg[fp] >= s) ++fp;
        numerator += static_cast<double>(group) * static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    return numerator / static_cast<double>(pos.size());
}

void sort_descending(std::vector<float>& v) { std::sort(v.begin(), v.end(), std::greater<float>()); }

}  // namespace

AnomalyMap residual_map(const Grid& x, const Grid& x_hat) {
    require_same_shape(x.shape(), x_hat.shape(), "residual_map");
    Grid a(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::abs(x[i] - x_hat[i]);
    return AnomalyMap{std::move(a)};
}

double average_precision(std::span<const float> positives, std::span<const float> negatives) {
    std::vector<float> pos(positives.begin(), positives.end());
    std::vector<float> neg(negatives.begin(), negatives.end());
    sort_descending(pos);
    sort_descending(neg);
    return ap_sorted(pos, neg);
}

double average_precision(const AnomalyMap& map, const BinaryMask& truth, const BinaryMask* eval_mask) {
    require_same_shape(map.scores.shape(), truth.shape(), "average_precision truth");
    if (eval_mask) require_same_shape(map.scores.shape(), eval_mask->shape(), "average_precision eval mask");
    std::vector<float> pos, neg;
    for (std::size_t i = 0; i < map.scores.size(); ++i) {
        if (eval_mask && !(*eval_mask)[i]) continue;
        (truth[i] ? pos : neg).push_back(map.scores[i]);
    }
    sort_descending(pos);
    sort_descending(neg);
    return ap_sorted(pos, neg);
}

NegativeRanking::NegativeRanking(std::vector<float> negatives) : sorted_(std::move(negatives)) {
    sort_descending(sorted_);
}

double NegativeRanking::average_precision(std::vector<float> positives) const {
    sort_descending(positives);
    return ap_sorted(positives, sorted_);
}

double ApResult::std_dev() const {
    if (per_image.empty()) return 0.0;
    double ss = 0.0;
    for (double v : per_image) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(per_image.size()));
}

ApResult summarize_ap(std::vector<std::string> ids, std::vector<double> per_image) {
    require(!per_image.empty(), ErrorCode::kEmptyInput, "dataset AP: no images");
    ApResult r;
    r.ids = std::move(ids);
    r.per_image = std::move(per_image);
    double sum = 0.0;
    for (double v : r.per_image) sum += v;
    r.mean = sum / static_cast<double>(r.per_image.size());
    return r;
}

ApResult dataset_ap(std::span<const ScoredImage> images) {
    std::vector<std::string> ids;
    std::vector<double> values;
    for (const auto& img : images) {
        try {
            values.push_back(average_precision(img.map, img.truth, img.eval_mask ? &*img.eval_mask : nullptr));
        } catch (const Error& e) {
            throw Error(e.code(), "image '" + img.id + "': " + e.what());
        }
        ids.push_back(img.id);
    }
    return summarize_ap(std::move(ids), std::move(values));
}

void write_ap_csv(const ApResult& result, std::ostream& out) {
    char buf[64];
    out << "image_id,ap\n";
    for (std::size_t i = 0; i < result.count(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10f", result.per_image[i]);
        out << result.ids[i] << ',' << buf << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.10f", result.mean);
    out << "__mean__," << buf << '\n';
}

CurveMatch best_matching_sigma(const ApCurve& model, std::span<const SigmaCurve> blur_curves) {
    require(!blur_curves.empty(), ErrorCode::kEmptyInput, "best_matching_sigma: no blur curves");
    require(model.intensities.size() == model.ap.size(), ErrorCode::kGridMismatch,
            "best_matching_sigma: model curve length mismatch");
    CurveMatch m;
    bool have_best = false;
    for (const auto& bc : blur_curves) {
        const bool same_grid =
            bc.curve.intensities.size() == model.intensities.size() && bc.curve.ap.size() == model.ap.size() &&
            std::equal(model.intensities.begin(), model.intensities.end(), bc.curve.intensities.begin(),
                       [](double a, double b) { return std::abs(a - b) <= 1e-9; });
        require(same_grid, ErrorCode::kGridMismatch, "best_matching_sigma: intensity grids differ");
        double dist = 0.0;
        for (std::size_t i = 0; i < model.ap.size(); ++i) dist += std::abs(model.ap[i] - bc.curve.ap[i]);
        m.sigmas.push_back(bc.sigma);
        m.distances.push_back(dist);
        if (!have_best || dist < m.best_distance || (dist == m.best_distance && bc.sigma < m.best_sigma)) {
            m.best_sigma = bc.sigma;
            m.best_distance = dist;
            have_best = true;
        }
    }
    return m;
}

}  // namespace reslab
