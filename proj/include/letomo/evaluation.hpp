#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "letomo/inversion.hpp"

namespace letomo {

/// Mean absolute nodewise difference over interior points, km/s.
double mae(const VelocityGrid& estimate, const VelocityGrid& truth);

/// Root mean square of T_obs - T_cal over `validation`, with rays traced on
/// `grid`. Throws UsageError when the set is empty.
double rmse_validation(const VelocityGrid& grid, const std::vector<Event>& events,
                       const std::vector<Station>& stations, std::span<const Arrival> validation, int star_order = 3);

/// (z, sqrt(g_z)) for z = 1..nz-2.
std::vector<std::pair<int, double>> gz_profile(const VelocityGrid& grid);

/// Default per-axis candidate set.
std::vector<double> default_candidates();

struct CvCell {
    double first = 0.0;  ///< lambda_ver, or the single lambda
    double second = 0.0; ///< lambda_hor; unused for one-parameter kinds
    double rmse = 0.0;
    bool valid = true;
    std::string message;
};

struct CvGrid {
    PenaltyKind kind = PenaltyKind::DLS;
    std::vector<double> first;
    std::vector<double> second; ///< empty for one-parameter kinds
    std::vector<CvCell> cells;  ///< first-major order
    int chosen = -1;
    std::vector<std::string> warnings;
};

/// Copy of `spec` with the kind's lambda(s) set.
RegularizerSpec with_lambdas(RegularizerSpec spec, double first, double second);

/// Two-parameter kinds (Proposed, L2Smooth) tune (lambda_ver, lambda_hor) over
/// first x second; one-parameter kinds tune their lambda over `first`; DLS
/// has a single cell. Each cell runs the full inversion on the training
/// arrivals and is scored on the validation arrivals. Failed cells are marked
/// invalid. The chosen cell has the least RMSE; ties go to the larger
/// (first, second).
CvGrid cross_validate(const VelocityGrid& initial, const Dataset& data, const InversionConfig& base,
                      const std::vector<double>& first, const std::vector<double>& second);

/// The spec of the chosen cell.
RegularizerSpec chosen_spec(const CvGrid& grid, const RegularizerSpec& base);

} // namespace letomo
