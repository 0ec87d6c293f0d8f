#pragma once

#include <array>
#include <vector>

namespace ampguard::devices {

/// Variable-speed air-to-air heat pump with staged resistance backup.
/// Backup stage codes {0,2,3,4} realize {0, 9.6, 14.4, 19.2} kW
/// (power = code * p_backup_max / 4).
struct HeatPumpModel {
    std::array<double, 3> cop_coeffs{2.515, 0.0605, 0.00075};  // c0 + c1*t + c2*t^2
    double p_min = 2.5;          // kW electric, compressor floor when on
    double p_max = 3.9;          // kW electric, compressor ceiling
    double p_backup_max = 19.2;  // kW, full Stage III resistance heat
    double power_factor = 0.8;
    double voltage = 240.0;
    double t_range_lo = -25.0;  // degC, configured COP fit range
    double t_range_hi = 20.0;
};

inline constexpr std::array<int, 4> kBackupStageCodes{0, 2, 3, 4};

/// Quadratic COP at outdoor temperature, clipped below at 1.0. Out-of-range
/// temperatures are clipped to the fit range endpoints; *extrapolated is set
/// when that happens.
double cop(const HeatPumpModel& model, double t_out, bool* extrapolated = nullptr);

struct CopFit {
    std::array<double, 3> coeffs;
    double r_squared;
};

/// Least-squares quadratic fit to (t_out, cop) pairs.
CopFit fit_cop_quadratic(const std::vector<std::pair<double, double>>& table);

/// Current draw in amps for thermal output q_thermal (kW) at COP eta with the
/// given backup stage. The compressor draws at the HP power factor; backup
/// resistance elements at unity. Throws std::domain_error on negative
/// q_thermal or an unknown stage code.
double hp_current(double q_thermal, double eta, int stage_code,
                  const HeatPumpModel& model);

/// Backup electric (== thermal) power for a stage code, kW.
double backup_power(int stage_code, const HeatPumpModel& model);

/// Resistance-mode tank water heater, uniform-temperature model.
struct WaterHeaterModel {
    double c_w = 0.197;     // kWh/degC
    double r_w = 1476.0;    // degC/kW
    double t_ambient = 19.0;  // degC around the tank
    double p_w = 4.5;       // kW, bottom element
    double a_w = 0.0;       // discrete pole, exp(-dt/(r_w*c_w))
    double voltage = 240.0;

    bool valid(double dt_hours, double tol = 1e-6) const;
};

WaterHeaterModel make_water_heater(double dt_hours);
WaterHeaterModel make_water_heater(double dt_hours, double c_w, double r_w,
                                   double t_ambient, double p_w);

/// One discrete step of the tank temperature. w_draw is the thermal power
/// removed by water draws (kW, >= 0).
double wh_step(double t_w, bool element_on, double w_draw,
               const WaterHeaterModel& model);

double wh_current(bool element_on, const WaterHeaterModel& model);

struct EvModel {
    double capacity = 70.0;      // kWh
    double charge_power = 11.5;  // kW (48 A at 240 V)
    double soc = 42.0;           // kWh
    double efficiency = 1.0;
    int max_switches = 16;
    double voltage = 240.0;

    double charger_current() const { return charge_power * 1000.0 / voltage; }
};

/// Battery integrator with clamping at capacity.
EvModel ev_step(const EvModel& ev, bool on, double dt_hours);

enum class BreakerZone { normal, undesirable, unsafe, trip_likely };

const char* to_string(BreakerZone z);

/// Time-current safety regions of the main breaker. Zone thresholds are
/// multiples of the rated current; thermal_trip_points are
/// (multiple, max sustain minutes) pairs used for trip verdicts.
struct TripCurve {
    double rated = 100.0;            // A
    double undesirable_multiple = 0.9;
    double unsafe_multiple = 1.0;
    double trip_multiple = 1.15;
    double unsafe_max_minutes = 5.0;  // sustain limit inside the unsafe band
    double magnetic_multiple = 5.0;   // immediate trip at/above this
    std::vector<std::pair<double, double>> thermal_trip_points{
        {0.8, 180.0}, {1.0, 60.0}, {1.15, 5.0}};

    bool valid() const;
};

/// Classifies a sustained current level against the curve's zones.
BreakerZone breaker_zone(double current_a, double sustained_minutes,
                         const TripCurve& curve);

/// True when a current sustained for the given minutes crosses a thermal trip
/// point or the magnetic threshold.
bool would_trip(double current_a, double sustained_minutes, const TripCurve& curve);

}  // namespace ampguard::devices
