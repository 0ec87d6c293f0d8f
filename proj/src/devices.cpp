#include "ampguard/devices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ampguard::devices {

double cop(const HeatPumpModel& model, double t_out, bool* extrapolated) {
    bool clipped = false;
    if (t_out < model.t_range_lo) {
        t_out = model.t_range_lo;
        clipped = true;
    } else if (t_out > model.t_range_hi) {
        t_out = model.t_range_hi;
        clipped = true;
    }
    if (extrapolated) *extrapolated = clipped;
    const auto& c = model.cop_coeffs;
    double v = c[0] + c[1] * t_out + c[2] * t_out * t_out;
    return std::max(1.0, v);
}

CopFit fit_cop_quadratic(const std::vector<std::pair<double, double>>& table) {
    if (table.size() < 3)
        throw std::invalid_argument("fit_cop_quadratic: need >= 3 points");
    Eigen::MatrixXd x(table.size(), 3);
    Eigen::VectorXd y(table.size());
    for (size_t i = 0; i < table.size(); ++i) {
        double t = table[i].first;
        x(i, 0) = 1.0;
        x(i, 1) = t;
        x(i, 2) = t * t;
        y(i) = table[i].second;
    }
    Eigen::Vector3d beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    double ss_res = (y - x * beta).squaredNorm();
    double ss_tot = (y.array() - y.mean()).square().sum();
    CopFit fit;
    fit.coeffs = {beta(0), beta(1), beta(2)};
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

double backup_power(int stage_code, const HeatPumpModel& model) {
    bool known = false;
    for (int c : kBackupStageCodes) known |= (c == stage_code);
    if (!known) throw std::domain_error("unknown backup stage code");
    return stage_code * model.p_backup_max / 4.0;
}

double hp_current(double q_thermal, double eta, int stage_code,
                  const HeatPumpModel& model) {
    if (q_thermal < 0.0) throw std::domain_error("hp_current: q_thermal < 0");
    if (!(eta > 0.0)) throw std::domain_error("hp_current: eta must be positive");
    double p_comp = q_thermal / (eta * model.power_factor);       // kW apparent
    double p_backup = backup_power(stage_code, model);            // unity pf
    return (p_comp + p_backup) * 1000.0 / model.voltage;
}

bool WaterHeaterModel::valid(double dt_hours, double tol) const {
    if (!(p_w > 0.0) || !(c_w > 0.0) || !(r_w > 0.0)) return false;
    return std::abs(a_w - std::exp(-dt_hours / (r_w * c_w))) <= tol;
}

WaterHeaterModel make_water_heater(double dt_hours) {
    WaterHeaterModel m;
    m.a_w = std::exp(-dt_hours / (m.r_w * m.c_w));
    return m;
}

WaterHeaterModel make_water_heater(double dt_hours, double c_w, double r_w,
                                   double t_ambient, double p_w) {
    WaterHeaterModel m;
    m.c_w = c_w;
    m.r_w = r_w;
    m.t_ambient = t_ambient;
    m.p_w = p_w;
    m.a_w = std::exp(-dt_hours / (r_w * c_w));
    return m;
}

double wh_step(double t_w, bool element_on, double w_draw,
               const WaterHeaterModel& model) {
    if (w_draw < 0.0) throw std::domain_error("wh_step: w_draw < 0");
    double p_elem = element_on ? model.p_w : 0.0;
    return model.a_w * t_w +
           (1.0 - model.a_w) * (model.t_ambient + model.r_w * (p_elem - w_draw));
}

double wh_current(bool element_on, const WaterHeaterModel& model) {
    return element_on ? model.p_w * 1000.0 / model.voltage : 0.0;
}

EvModel ev_step(const EvModel& ev, bool on, double dt_hours) {
    EvModel next = ev;
    if (on)
        next.soc = std::min(ev.capacity,
                            ev.soc + ev.charge_power * ev.efficiency * dt_hours);
    return next;
}

const char* to_string(BreakerZone z) {
    switch (z) {
        case BreakerZone::normal: return "normal";
        case BreakerZone::undesirable: return "undesirable";
        case BreakerZone::unsafe: return "unsafe";
        case BreakerZone::trip_likely: return "trip_likely";
    }
    return "?";
}

bool TripCurve::valid() const {
    if (!(rated > 0.0)) return false;
    if (!(undesirable_multiple <= unsafe_multiple &&
          unsafe_multiple <= trip_multiple))
        return false;
    double prev_mult = 0.0, prev_dur = 1e18;
    for (const auto& [mult, dur] : thermal_trip_points) {
        if (mult < prev_mult || dur > prev_dur) return false;  // must be monotone
        prev_mult = mult;
        prev_dur = dur;
    }
    return true;
}

BreakerZone breaker_zone(double current_a, double sustained_minutes,
                         const TripCurve& curve) {
    if (current_a < 0.0) throw std::domain_error("breaker_zone: current < 0");
    if (current_a >= curve.magnetic_multiple * curve.rated)
        return BreakerZone::trip_likely;
    if (current_a > curve.trip_multiple * curve.rated)
        return BreakerZone::trip_likely;
    if (current_a > curve.unsafe_multiple * curve.rated)
        return sustained_minutes > curve.unsafe_max_minutes
                   ? BreakerZone::trip_likely
                   : BreakerZone::unsafe;
    if (current_a >= curve.undesirable_multiple * curve.rated)
        return BreakerZone::undesirable;
    return BreakerZone::normal;
}

bool would_trip(double current_a, double sustained_minutes, const TripCurve& curve) {
    if (current_a >= curve.magnetic_multiple * curve.rated) return true;
    for (const auto& [mult, dur] : curve.thermal_trip_points)
        if (current_a > mult * curve.rated && sustained_minutes > dur) return true;
    return false;
}

}  // namespace ampguard::devices
