#include "taperfold/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace taperfold {

namespace {

double interp(const std::vector<double>& c, const std::vector<double>& f, double at) {
    for (size_t i = 1; i < c.size(); ++i) {
        if (at <= c[i]) {
            if (c[i] == c[i - 1]) return f[i];
            const double s = (at - c[i - 1]) / (c[i] - c[i - 1]);
            return f[i - 1] + s * (f[i] - f[i - 1]);
        }
    }
    return f.back();
}

// One-sided binomial tail P[X >= k] with X ~ Binomial(m, 1/2).
double sign_test_p(int k, int m) {
    if (m <= 0) return 1.0;
    double tail = 0.0;
    double coeff = 1.0;  // C(m, 0)
    for (int j = 0; j <= m; ++j) {
        if (j >= k) tail += coeff;
        coeff = coeff * (m - j) / (j + 1);
    }
    return tail / std::pow(2.0, m);
}

}  // namespace

ConstantForceReport constant_force_range(const EquilibriumPath& path, double baseline_strain,
                                         double band) {
    const auto& s = path.samples;
    if (s.size() < 10) throw InsufficientData("constant-force detection needs at least 10 samples");
    std::vector<double> c(s.size()), f(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        c[i] = s[i].control;
        f[i] = s[i].reaction;
    }
    if (baseline_strain < c.front() || baseline_strain > c.back()) {
        throw BaselineOutOfDomain("baseline strain outside the sampled path");
    }
    const double F0 = interp(c, f, baseline_strain);
    if (!(F0 > 0.0)) throw NonPositiveBaseline("reaction at the baseline strain is not positive");

    const double hiF = F0 * (1.0 + band);
    const double loF = F0 * (1.0 - band);
    const double slack = 1e-12 * F0;
    const auto inband = [&](double F) { return F >= loF - slack && F <= hiF + slack; };

    ConstantForceReport r;
    r.baseline_strain = baseline_strain;
    r.baseline_force = F0;
    r.band = band;

    // Segment that contains the baseline.
    size_t ib = 1;
    while (ib < c.size() && c[ib] < baseline_strain) ++ib;

    // Walk left from the baseline to the first band crossing.
    double in_c = baseline_strain, in_f = F0;
    bool crossed_lo = false;
    r.strain_lo = c.front();
    for (size_t i = ib; i-- > 0;) {
        if (inband(f[i])) {
            in_c = c[i];
            in_f = f[i];
            continue;
        }
        const double target = (f[i] > F0) ? hiF : loF;
        const double t = (target - f[i]) / (in_f - f[i]);
        r.strain_lo = c[i] + t * (in_c - c[i]);
        crossed_lo = true;
        break;
    }

    // Walk right.
    in_c = baseline_strain;
    in_f = F0;
    bool crossed_hi = false;
    r.strain_hi = c.back();
    for (size_t i = ib; i < c.size(); ++i) {
        if (inband(f[i])) {
            in_c = c[i];
            in_f = f[i];
            continue;
        }
        const double target = (f[i] > F0) ? hiF : loF;
        const double t = (target - f[i]) / (in_f - f[i]);
        r.strain_hi = c[i] + t * (in_c - c[i]);
        crossed_hi = true;
        break;
    }

    // Max excursion: interior knots, plus the exact band value at crossed
    // endpoints, plus the actual values at clipped domain ends.
    double fluct = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] > r.strain_lo && c[i] < r.strain_hi) {
            fluct = std::max(fluct, std::abs(f[i] - F0) / F0);
        }
    }
    if (crossed_lo || crossed_hi) fluct = std::max(fluct, band);
    if (!crossed_lo) fluct = std::max(fluct, std::abs(f.front() - F0) / F0);
    if (!crossed_hi) fluct = std::max(fluct, std::abs(f.back() - F0) / F0);
    r.fluctuation = std::min(fluct, band);

    // Mean over the range by exact trapezoid integration of the polyline.
    const double width = r.strain_hi - r.strain_lo;
    if (width <= 0.0) {
        r.plateau_force = F0;
        return r;
    }
    double area = 0.0;
    double prev_c = r.strain_lo, prev_f = interp(c, f, r.strain_lo);
    for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] <= r.strain_lo || c[i] >= r.strain_hi) continue;
        area += 0.5 * (prev_f + f[i]) * (c[i] - prev_c);
        prev_c = c[i];
        prev_f = f[i];
    }
    const double end_f = interp(c, f, r.strain_hi);
    area += 0.5 * (prev_f + end_f) * (r.strain_hi - prev_c);
    r.plateau_force = area / width;
    return r;
}

const char* to_string(TrendDirection d) {
    switch (d) {
        case TrendDirection::Increasing: return "increasing";
        case TrendDirection::Decreasing: return "decreasing";
        case TrendDirection::NonIncreasing: return "non-increasing";
        case TrendDirection::NonDecreasing: return "non-decreasing";
        default: return "mixed";
    }
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("fit needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw InsufficientData("fit abscissae are all identical");
    LinearFit out;
    out.slope = (n * sxy - sx * sy) / det;
    out.intercept = (sy - out.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (size_t i = 0; i < x.size(); ++i) {
        const double pred = out.slope * x[i] + out.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    out.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

SweepReport sweep_trends(const std::vector<Family>& families) {
    SweepReport out;
    for (const Family& fam : families) {
        if (fam.configs.size() < 2) {
            throw InsufficientData("family '" + fam.name + "' needs at least 2 configs");
        }
        std::vector<ConfigSummary> cfg = fam.configs;
        std::sort(cfg.begin(), cfg.end(),
                  [](const ConfigSummary& a, const ConfigSummary& b) {
                      return a.parameter < b.parameter;
                  });
        for (const ConfigSummary& cs : cfg) {
            if (!out.per_config.emplace(cs.label, cs.report).second) {
                throw Error("config '" + cs.label + "' appears more than once");
            }
        }

        int up = 0, down = 0, flat = 0;
        for (size_t i = 1; i < cfg.size(); ++i) {
            const double d = cfg[i].report.plateau_force - cfg[i - 1].report.plateau_force;
            if (d > 0.0) ++up;
            else if (d < 0.0) ++down;
            else ++flat;
        }
        const int m = up + down + flat;
        FamilyReport fr;
        if (down == m) {
            fr.trend.direction = TrendDirection::Decreasing;
            fr.trend.strict = true;
        } else if (up == m) {
            fr.trend.direction = TrendDirection::Increasing;
            fr.trend.strict = true;
        } else if (up == 0) {
            fr.trend.direction = TrendDirection::NonIncreasing;
        } else if (down == 0) {
            fr.trend.direction = TrendDirection::NonDecreasing;
        } else {
            fr.trend.direction = TrendDirection::Mixed;
        }
        fr.trend.p_value = sign_test_p(std::max(up, down), m);

        if (cfg.size() >= 3) {
            std::vector<double> xs, ys;
            for (const ConfigSummary& cs : cfg) {
                xs.push_back(cs.parameter);
                ys.push_back(cs.report.plateau_force);
            }
            fr.fit = linear_fit(xs, ys);
        }
        out.families[fam.name] = fr;
    }
    return out;
}

double torsional_stiffness(const EquilibriumPath& path, double fit_window_deg) {
    std::vector<double> x, y;
    for (const PathSample& s : path.samples) {
        if (s.control >= 0.0 && s.control <= fit_window_deg) {
            x.push_back(s.control);
            y.push_back(s.reaction);
        }
    }
    if (x.size() < 3) throw InsufficientData("torsional fit needs at least 3 samples in the window");
    const LinearFit fit = linear_fit(x, y);
    return fit.slope / 1000.0;  // N*mm/deg -> N*m/deg
}

}  // namespace taperfold
