#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taperfold/solver.hpp"

namespace taperfold {

// Constant-force window around the baseline strain: the maximal contiguous
// strain range containing the baseline where the reaction stays within the
// relative band of the baseline force.
struct ConstantForceReport {
    double baseline_strain = 0.25;
    double baseline_force = 0.0;  // N
    double band = 0.05;
    double strain_lo = 0.0;
    double strain_hi = 0.0;
    double plateau_force = 0.0;  // mean reaction over [strain_lo, strain_hi]
    double fluctuation = 0.0;    // max |F - F0| / F0 over the range

    double range_width() const { return strain_hi - strain_lo; }
};

ConstantForceReport constant_force_range(const EquilibriumPath& path,
                                         double baseline_strain = 0.25, double band = 0.05);

enum class TrendDirection { Increasing, Decreasing, NonIncreasing, NonDecreasing, Mixed };

const char* to_string(TrendDirection d);

struct TrendVerdict {
    TrendDirection direction = TrendDirection::Mixed;
    bool strict = false;
    double p_value = 1.0;  // one-sided sign test over consecutive differences
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ConfigSummary {
    std::string label;       // e.g. "M6"
    double parameter = 0.0;  // the swept parameter value
    ConstantForceReport report;
};

struct Family {
    std::string name;                    // "dist", "alpha", "tc", "scale"
    std::string parameter;               // swept parameter symbol
    std::vector<ConfigSummary> configs;  // ordered by parameter
};

struct FamilyReport {
    TrendVerdict trend;
    std::optional<LinearFit> fit;  // plateau force vs parameter, >= 3 configs
};

struct SweepReport {
    std::map<std::string, ConstantForceReport> per_config;
    std::map<std::string, FamilyReport> families;
};

// Trend verdicts (strict pairwise ordering of plateau means) and linear
// fits per family. Throws InsufficientData below two configs per family
// and Error when a config label repeats.
SweepReport sweep_trends(const std::vector<Family>& families);

// Least-squares slope of torque vs twist over [0, fit_window_deg],
// converted from N*mm/deg to N*m/deg.
double torsional_stiffness(const EquilibriumPath& path, double fit_window_deg = 3.0);

}  // namespace taperfold
