#include "letomo/evaluation.hpp"

#include <cmath>

#include "letomo/errors.hpp"

namespace letomo {

namespace {

bool two_parameter(PenaltyKind k)
{
    return k == PenaltyKind::Proposed || k == PenaltyKind::L2Smooth;
}

} // namespace

double mae(const VelocityGrid& estimate, const VelocityGrid& truth)
{
    if (estimate.nx() != truth.nx() || estimate.ny() != truth.ny() || estimate.nz() != truth.nz())
        throw DataError("MAE needs grids of identical dimensions");
    return (estimate.interior() - truth.interior()).cwiseAbs().mean();
}

double rmse_validation(const VelocityGrid& grid, const std::vector<Event>& events,
                       const std::vector<Station>& stations, std::span<const Arrival> validation, int star_order)
{
    if (validation.empty()) throw UsageError("validation set is empty");
    const double rss = arrival_rss(grid, events, stations, validation, star_order);
    return std::sqrt(rss / static_cast<double>(validation.size()));
}

std::vector<std::pair<int, double>> gz_profile(const VelocityGrid& grid)
{
    std::vector<std::pair<int, double>> out;
    for (int z = 1; z + 1 < grid.nz(); ++z) out.emplace_back(z, std::sqrt(second_difference_gz(grid, z)));
    return out;
}

std::vector<double> default_candidates()
{
    return {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
}

RegularizerSpec with_lambdas(RegularizerSpec spec, double first, double second)
{
    switch (spec.kind) {
    case PenaltyKind::DLS: break;
    case PenaltyKind::Proposed:
    case PenaltyKind::L2Smooth:
        spec.lambda_ver = first;
        spec.lambda_hor = second;
        break;
    case PenaltyKind::Lap: spec.lambda_lap = first; break;
    case PenaltyKind::L1First: spec.lambda_l1first = first; break;
    case PenaltyKind::L1Second: spec.lambda_l1second = first; break;
    }
    return spec;
}

CvGrid cross_validate(const VelocityGrid& initial, const Dataset& data, const InversionConfig& base,
                      const std::vector<double>& first, const std::vector<double>& second)
{
    CvGrid cv;
    cv.kind = base.spec.kind;
    if (cv.kind == PenaltyKind::DLS) {
        cv.first = {0.0};
    } else {
        if (first.empty()) throw UsageError("cross-validation needs at least one candidate");
        cv.first = first;
        if (two_parameter(cv.kind)) {
            if (second.empty()) throw UsageError("cross-validation needs candidates for both lambdas");
            cv.second = second;
        }
    }
    const std::vector<double> seconds = cv.second.empty() ? std::vector<double>{0.0} : cv.second;
    const std::vector<Arrival> train = data.train();

    for (double a : cv.first)
        for (double b : seconds) {
            CvCell cell{a, b, 0.0, true, {}};
            InversionConfig cfg = base;
            cfg.spec = with_lambdas(base.spec, a, b);
            try {
                const InversionResult r = run_inversion(initial, data.events, data.stations, train, cfg);
                const std::vector<Arrival> validation = data.validation();
                cell.rmse = rmse_validation(r.grid, r.events, data.stations, validation, cfg.star_order);
                if (!std::isfinite(cell.rmse)) throw SolverError("non-finite validation RMSE");
            } catch (const Error& e) {
                if (e.kind() != "solver" && e.kind() != "computation") throw;
                cell.valid = false;
                cell.message = e.what();
                cv.warnings.push_back("candidate (" + std::to_string(a) + ", " + std::to_string(b) +
                                      ") failed: " + e.what());
            }
            cv.cells.push_back(cell);
        }

    for (std::size_t k = 0; k < cv.cells.size(); ++k) {
        const CvCell& c = cv.cells[k];
        if (!c.valid) continue;
        if (cv.chosen < 0) {
            cv.chosen = static_cast<int>(k);
            continue;
        }
        const CvCell& best = cv.cells[cv.chosen];
        const bool larger = c.first > best.first || (c.first == best.first && c.second > best.second);
        if (c.rmse < best.rmse || (c.rmse == best.rmse && larger)) cv.chosen = static_cast<int>(k);
    }
    if (cv.chosen < 0) throw SolverError("every cross-validation candidate failed");
    return cv;
}

RegularizerSpec chosen_spec(const CvGrid& grid, const RegularizerSpec& base)
{
    if (grid.chosen < 0) throw UsageError("cross-validation grid has no chosen cell");
    const CvCell& c = grid.cells[grid.chosen];
    return with_lambdas(base, c.first, c.second);
}

} // namespace letomo
