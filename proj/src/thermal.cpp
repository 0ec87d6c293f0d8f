#include "ampguard/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ampguard/csv.hpp"

namespace ampguard::thermal {

bool ThermalParams::valid() const {
    if (!(r_out > 0.0 && r_m > 0.0 && c > 0.0)) return false;
    if (!(a > 0.0 && a < 1.0)) return false;
    double expected = r_m * r_out / (r_m + r_out);
    return std::abs(r_eff - expected) <= 1e-12 * std::max(1.0, std::abs(expected));
}

void ThermalParams::require_valid() const {
    if (!valid()) throw std::invalid_argument("invalid ThermalParams");
}

ThermalParams make_params(double r_out, double r_m, double c, double t_mass,
                          double dt_hours, double w0) {
    ThermalParams p;
    p.r_out = r_out;
    p.r_m = r_m;
    p.c = c;
    p.t_mass = t_mass;
    p.w0 = w0;
    p.r_eff = r_m * r_out / (r_m + r_out);
    p.a = discretize(p.r_eff, c, dt_hours);
    p.require_valid();
    return p;
}

TrackingParams make_tracking(double b, double gamma, double dt_hours) {
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("b must be in (0,1)");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    TrackingParams tp;
    tp.b = b;
    tp.gamma = gamma;
    tp.tau = -dt_hours / std::log(b);
    return tp;
}

double effective_boundary_temp(double t_out, const ThermalParams& params) {
    return (params.r_m * t_out + params.r_out * params.t_mass) /
           (params.r_m + params.r_out);
}

double discretize(double r, double c, double dt_hours) {
    if (!(r > 0.0) || !(c > 0.0) || !(dt_hours > 0.0))
        throw std::domain_error("discretize: r, c, dt must all be positive");
    return std::exp(-dt_hours / (r * c));
}

double step_temperature(double t_in, double theta, double q_hp, double w,
                        const ThermalParams& params) {
    return params.a * t_in +
           (1.0 - params.a) * (theta + params.r_eff * (q_hp + w));
}

double invert_for_w(double t_in, double t_in_next, double theta, double q_hp,
                    const ThermalParams& params) {
    if (!(params.a > 0.0 && params.a < 1.0))
        throw std::domain_error("invert_for_w: a must be in (0,1)");
    return ((t_in_next - params.a * t_in) / (1.0 - params.a) - theta) /
               params.r_eff -
           q_hp;
}

double track_setpoint(double t_in, double setpoint, const TrackingParams& tp) {
    return tp.b * t_in + (1.0 - tp.b) * (setpoint - tp.gamma);
}

SteadyFit fit_steady(const std::vector<OvernightSample>& samples) {
    // Least squares of y = t_in - t_out on x = q_hp.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& s : samples) {
        if (!s.steady) continue;
        double x = s.q_hp, y = s.t_in - s.t_out;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw IdentificationError("fit_steady: need >= 2 steady samples");
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) <= 1e-12 * std::max(1.0, n * sxx))
        throw IdentificationError("fit_steady: rank-deficient (q_hp has no spread)");
    SteadyFit fit;
    fit.r_out = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.r_out * sx) / n;
    if (!(fit.r_out > 0.0))
        throw IdentificationError("fit_steady: non-positive slope; data not physical");
    fit.w0 = fit.intercept / fit.r_out;
    fit.samples_used = n;
    return fit;
}

namespace {

// Through-origin regression targets for one r_m candidate. The exact
// discretization gives
//   T(k+1) - theta(k) - R(Q(k) + w0) = a * [T(k) - theta(k) - R(Q(k) + w0)],
// so a is the slope of y on x with both sides sharing the same offset term.
struct Pair {
    double x, y;
};

std::vector<Pair> regression_pairs(const std::vector<OvernightSample>& samples,
                                   double r_out, double w0, double r_m,
                                   double t_mass) {
    std::vector<Pair> out;
    out.reserve(samples.size());
    double r_eff = r_m * r_out / (r_m + r_out);
    for (const auto& s : samples) {
        double theta = (r_m * s.t_out + r_out * t_mass) / (r_m + r_out);
        double offset = theta + r_eff * (s.q_hp + w0);
        out.push_back({s.t_in - offset, s.t_in_next - offset});
    }
    return out;
}

}  // namespace

UnsteadyFit fit_unsteady(const std::vector<OvernightSample>& samples,
                         double r_out, double w0,
                         const std::vector<double>& r_m_grid) {
    if (r_m_grid.empty()) throw IdentificationError("fit_unsteady: empty r_m grid");
    if (samples.size() < 4)
        throw IdentificationError("fit_unsteady: need >= 4 samples");

    double t_mass = 0.0;
    for (const auto& s : samples) t_mass += s.t_in;
    t_mass /= static_cast<double>(samples.size());

    size_t split = (samples.size() * 2) / 3;
    if (split < 2) split = 2;

    UnsteadyFit best;
    double best_mse = std::numeric_limits<double>::infinity();
    for (double r_m : r_m_grid) {
        if (!(r_m > 0.0)) continue;
        auto pairs = regression_pairs(samples, r_out, w0, r_m, t_mass);
        double sxx = 0, sxy = 0;
        for (size_t i = 0; i < split; ++i) {
            sxx += pairs[i].x * pairs[i].x;
            sxy += pairs[i].x * pairs[i].y;
        }
        if (sxx <= 0.0) continue;
        double a = sxy / sxx;
        if (!(a > 0.0 && a < 1.0)) continue;
        double mse = 0.0;
        size_t nval = 0;
        for (size_t i = split; i < pairs.size(); ++i) {
            double err = pairs[i].y - a * pairs[i].x;
            mse += err * err;
            ++nval;
        }
        if (nval == 0) {  // single grid point on tiny data: score on train
            for (size_t i = 0; i < split; ++i) {
                double err = pairs[i].y - a * pairs[i].x;
                mse += err * err;
            }
            nval = split;
        }
        mse /= static_cast<double>(nval);
        if (mse < best_mse) {
            best_mse = mse;
            best.r_m = r_m;
            best.a = a;
            best.t_mass = t_mass;
            best.validation_mse = mse;
        }
    }
    if (!(best.a > 0.0 && best.a < 1.0))
        throw IdentificationError("fit_unsteady: no grid candidate gave a in (0,1)");
    return best;
}

std::vector<double> default_r_m_grid(double r_out, int n, double lo, double hi) {
    std::vector<double> grid;
    grid.reserve(n);
    double llo = std::log(lo * r_out), lhi = std::log(hi * r_out);
    for (int i = 0; i < n; ++i) {
        double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        grid.push_back(std::exp(llo + f * (lhi - llo)));
    }
    return grid;
}

std::vector<OvernightSample> extract_overnight_samples(
    const std::vector<EpochSeconds>& timestamps, const std::vector<double>& t_in,
    const std::vector<double>& t_out, const std::vector<double>& q_hp,
    const SampleExtractionConfig& cfg) {
    size_t n = timestamps.size();
    if (t_in.size() != n || t_out.size() != n || q_hp.size() != n)
        throw std::invalid_argument("extract_overnight_samples: length mismatch");
    std::vector<OvernightSample> out;
    auto overnight = [&](EpochSeconds t) {
        double h = hour_of_day(t);
        if (cfg.overnight_start_hour <= cfg.overnight_end_hour)
            return h >= cfg.overnight_start_hour && h < cfg.overnight_end_hour;
        return h >= cfg.overnight_start_hour || h < cfg.overnight_end_hour;
    };
    double dt_s = cfg.dt_hours * 3600.0;
    for (size_t i = 0; i + 1 < n; ++i) {
        if (timestamps[i + 1] <= timestamps[i])
            throw std::invalid_argument(
                "extract_overnight_samples: timestamps must strictly increase");
        double gap = static_cast<double>(timestamps[i + 1] - timestamps[i]);
        if (gap > cfg.max_gap_factor * dt_s) continue;
        if (!overnight(timestamps[i])) continue;
        if (!std::isfinite(t_in[i]) || !std::isfinite(t_out[i]) ||
            !std::isfinite(q_hp[i]) || !std::isfinite(t_in[i + 1]))
            continue;
        OvernightSample s;
        s.timestamp = timestamps[i];
        s.t_in = t_in[i];
        s.t_in_next = t_in[i + 1];
        s.t_out = t_out[i];
        s.q_hp = q_hp[i];
        s.steady = std::abs(t_in[i + 1] - t_in[i]) <= cfg.steady_threshold;
        out.push_back(s);
    }
    return out;
}

TrainingSeries load_training_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_columns(t, {"timestamp", "t_in", "t_out", "q_hp"}, path);
    int ct = t.column("timestamp"), ci = t.column("t_in"), co = t.column("t_out"),
        cq = t.column("q_hp");
    TrainingSeries s;
    for (const auto& row : t.rows) {
        s.timestamps.push_back(parse_iso8601(row[ct]));
        s.t_in.push_back(std::stod(row[ci]));
        s.t_out.push_back(std::stod(row[co]));
        s.q_hp.push_back(std::stod(row[cq]));
    }
    return s;
}

ThermalParams identify(const TrainingSeries& series,
                       const SampleExtractionConfig& cfg,
                       const std::vector<double>& r_m_grid) {
    auto samples = extract_overnight_samples(series.timestamps, series.t_in,
                                             series.t_out, series.q_hp, cfg);
    SteadyFit sf = fit_steady(samples);
    std::vector<double> grid =
        r_m_grid.empty() ? default_r_m_grid(sf.r_out) : r_m_grid;
    UnsteadyFit uf = fit_unsteady(samples, sf.r_out, sf.w0, grid);

    ThermalParams p;
    p.r_out = sf.r_out;
    p.r_m = uf.r_m;
    p.t_mass = uf.t_mass;
    p.w0 = sf.w0;
    p.r_eff = uf.r_m * sf.r_out / (uf.r_m + sf.r_out);
    p.a = uf.a;
    // c implied by the identified pole and effective resistance
    p.c = -cfg.dt_hours / (std::log(uf.a) * p.r_eff);
    p.require_valid();
    return p;
}

}  // namespace ampguard::thermal
