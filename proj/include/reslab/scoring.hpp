#pragma once

#include "reslab/grid.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace reslab {

/// Per-pixel anomaly scores; here always |x - x_hat|.
struct AnomalyMap {
    Grid scores;
};

AnomalyMap residual_map(const Grid& x, const Grid& x_hat);

/// Average precision with tied scores collapsed into one operating point:
///   AP = sum over distinct scores s (descending) of
///        (#positives scoring exactly s / P) * precision(score >= s).
/// The numerator is accumulated in positive counts and divided by P once, so
/// perfect separation yields exactly 1.0. Throws kNoPositives when P == 0.
double average_precision(std::span<const float> positives, std::span<const float> negatives);

/// Same statistic over a map; pixels outside `eval_mask` (when given) are ignored.
double average_precision(const AnomalyMap& map, const BinaryMask& truth, const BinaryMask* eval_mask = nullptr);

/// Negatives sorted once, reused against many positive sets. Used when only
/// the positive region changes between sweep cells.
class NegativeRanking {
public:
    explicit NegativeRanking(std::vector<float> negatives);
    double average_precision(std::vector<float> positives) const;

private:
    std::vector<float> sorted_;  // descending
};

struct ApResult {
    std::vector<std::string> ids;
    std::vector<double> per_image;
    double mean = 0.0;

    std::size_t count() const { return per_image.size(); }
    /// Population standard deviation of the per-image values.
    double std_dev() const;
};

struct ScoredImage {
    std::string id;
    AnomalyMap map;
    BinaryMask truth;
    std::optional<BinaryMask> eval_mask;
};

/// Macro average of per-image AP in input order. Errors name the failing image.
ApResult dataset_ap(std::span<const ScoredImage> images);
/// Mean of already-computed per-image values (summed in index order).
ApResult summarize_ap(std::vector<std::string> ids, std::vector<double> per_image);

/// `image_id,ap` rows followed by a `__mean__` row.
void write_ap_csv(const ApResult& result, std::ostream& out);

struct ApCurve {
    std::vector<double> intensities;
    std::vector<double> ap;
};

struct SigmaCurve {
    double sigma = 0.0;
    ApCurve curve;
};

struct CurveMatch {
    std::vector<double> sigmas;
    std::vector<double> distances;  // sum over intensities of |AP_model - AP_blur|
    double best_sigma = 0.0;
    double best_distance = 0.0;
};

/// Blur strength whose AP-vs-intensity curve is closest in L1 to `model`;
/// ties go to the smaller sigma. Throws kGridMismatch when intensity grids differ.
CurveMatch best_matching_sigma(const ApCurve& model, std::span<const SigmaCurve> blur_curves);

}  // namespace reslab
