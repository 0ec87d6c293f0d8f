#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ampguard/timeutil.hpp"

namespace ampguard::thermal {

struct IdentificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Identified building envelope parameters. The two-resistor circuit
/// (indoor<->outdoor and indoor<->mass) reduces to a single effective
/// resistance r_eff = r_m*r_out/(r_m + r_out) and a discrete pole
/// a = exp(-dt/(r_eff*c)).
struct ThermalParams {
    double r_out = 0.0;   // degC/kW, indoor <-> outdoor
    double r_m = 0.0;     // degC/kW, indoor <-> interior mass
    double c = 0.0;       // kWh/degC, indoor air capacitance
    double t_mass = 0.0;  // degC, interior mass temperature (held constant)
    double r_eff = 0.0;   // degC/kW
    double a = 0.0;       // discrete dynamics parameter, in (0,1)
    double w0 = 0.0;      // kW, steady exogenous power

    bool valid() const;
    void require_valid() const;  // throws std::invalid_argument
};

/// Builds a consistent parameter set from the independent quantities.
ThermalParams make_params(double r_out, double r_m, double c, double t_mass,
                          double dt_hours, double w0 = 0.0);

/// Set-point tracking model of the device-level controller: the measured
/// temperature settles at setpoint - gamma with first-order dynamics.
struct TrackingParams {
    double b = 0.5;      // discrete tracking parameter, in (0,1)
    double gamma = 0.5;  // degC, dead-band half-width
    double tau = 0.0;    // h, tracking time constant

    bool valid() const { return b > 0.0 && b < 1.0 && gamma >= 0.0; }
};

TrackingParams make_tracking(double b, double gamma, double dt_hours);

struct OvernightSample {
    EpochSeconds timestamp = 0;
    double t_in = 0.0;       // degC
    double t_in_next = 0.0;  // degC, one control step later
    double t_out = 0.0;      // degC
    double q_hp = 0.0;       // kW thermal delivered to the space
    bool steady = false;     // dT/dt ~ 0 classification
};

/// Weighted average of outdoor and mass temperatures seen by the 1R1C state.
double effective_boundary_temp(double t_out, const ThermalParams& params);

/// a = exp(-dt/(r*c)); throws std::domain_error on non-positive inputs.
double discretize(double r, double c, double dt_hours);

/// One exact discrete step of the 1R1C dynamics under piecewise-constant
/// inputs: a*t_in + (1-a)*[theta + r_eff*(q_hp + w)].
double step_temperature(double t_in, double theta, double q_hp, double w,
                        const ThermalParams& params);

/// Solves the discrete dynamics for the exogenous power that produced the
/// observed transition. Throws std::domain_error unless 0 < a < 1.
double invert_for_w(double t_in, double t_in_next, double theta, double q_hp,
                    const ThermalParams& params);

/// One step of the device-level tracking model:
/// b*t_in + (1-b)*(setpoint - gamma).
double track_setpoint(double t_in, double setpoint, const TrackingParams& tp);

struct SteadyFit {
    double r_out = 0.0;
    double w0 = 0.0;
    double intercept = 0.0;  // r_out * w0
    int samples_used = 0;
};

/// Regresses (t_in - t_out) on q_hp over steady samples; slope is r_out and
/// intercept/r_out is w0. Throws IdentificationError when the regression is
/// rank-deficient (fewer than two distinct q_hp values).
SteadyFit fit_steady(const std::vector<OvernightSample>& samples);

struct UnsteadyFit {
    double r_m = 0.0;
    double a = 0.0;
    double t_mass = 0.0;
    double validation_mse = 0.0;
};

/// Grid search over r_m with a per-candidate through-origin regression for a
/// on unsteady samples. t_mass is the time-average indoor temperature of the
/// sample set. Chronological split: first 2/3 fit, last 1/3 validation MSE.
/// Throws IdentificationError on an empty grid or when no candidate yields
/// a in (0,1).
UnsteadyFit fit_unsteady(const std::vector<OvernightSample>& samples,
                         double r_out, double w0,
                         const std::vector<double>& r_m_grid);

/// Default logarithmic r_m search grid: n points spanning [lo, hi]*r_out.
std::vector<double> default_r_m_grid(double r_out, int n = 25, double lo = 0.05,
                                     double hi = 5.0);

struct SampleExtractionConfig {
    double dt_hours = 1.0 / 12.0;
    double steady_threshold = 0.05;  // degC per step
    int overnight_start_hour = 23;
    int overnight_end_hour = 6;
    double max_gap_factor = 1.5;  // reject pairs spaced > factor*dt
};

/// Converts a (timestamp, t_in, t_out, q_hp) series into regression samples,
/// keeping only overnight transitions and classifying steady ones.
std::vector<OvernightSample> extract_overnight_samples(
    const std::vector<EpochSeconds>& timestamps, const std::vector<double>& t_in,
    const std::vector<double>& t_out, const std::vector<double>& q_hp,
    const SampleExtractionConfig& cfg);

struct TrainingSeries {
    std::vector<EpochSeconds> timestamps;
    std::vector<double> t_in;
    std::vector<double> t_out;
    std::vector<double> q_hp;
};

/// Reads the CSV contract `timestamp,t_in,t_out,q_hp` with ISO-8601 stamps.
TrainingSeries load_training_csv(const std::string& path);

/// Runs both identification stages on a training series.
ThermalParams identify(const TrainingSeries& series,
                       const SampleExtractionConfig& cfg,
                       const std::vector<double>& r_m_grid = {});

}  // namespace ampguard::thermal
