#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ampguard/timeutil.hpp"

namespace ampguard::forecast {

struct WeatherPoint {
    double hour_of_day = 0.0;  // [0, 24)
    double t_out = 0.0;        // degC
    double wind = 0.0;         // m/s
    double ghi = 0.0;          // W/m^2

    bool valid() const {
        return hour_of_day >= 0.0 && hour_of_day < 24.0 && ghi >= 0.0 && wind >= 0.0;
    }
};

/// Open-loop regressor interface: exogenous thermal power from weather and
/// time-of-day features, no temperature feedback. Implementations must be
/// immutable after training.
class OpenLoopModel {
public:
    virtual ~OpenLoopModel() = default;
    virtual double predict(const WeatherPoint& x) const = 0;
    virtual std::string serialize() const = 0;
};

struct KernelRidgeConfig {
    double ridge = 1e-3;
    int max_train_points = 2000;  // uniform subsample above this
};

/// Kernel ridge regression with a radial-basis kernel. Features are
/// (sin h, cos h, t_out, wind, ghi), z-scored; the bandwidth is the median
/// pairwise distance of the training features.
std::unique_ptr<OpenLoopModel> train_open_loop(
    const std::vector<WeatherPoint>& features, const std::vector<double>& targets,
    const KernelRidgeConfig& cfg = {});

std::unique_ptr<OpenLoopModel> deserialize_open_loop(const std::string& blob);

/// One lead's autoregressive error model e_hat(k+lead|k) from past residuals.
struct ArModel {
    std::vector<double> beta;  // intercept first, then memory lags
    double sigma = 0.0;        // kW, validation residual standard deviation
    int memory = 0;
    int lead = 0;
    bool ill_conditioned = false;

    double predict(const std::vector<double>& recent_errors) const;
};

/// Least-squares fit of the lead-step error predictor on the first 2/3 of the
/// series; sigma is the residual standard deviation on the final 1/3. Falls
/// back to a pseudo-inverse solve (flagging ill_conditioned) when the normal
/// equations are singular.
ArModel fit_ar_errors(const std::vector<double>& errors, int lead, int memory);

struct ExogForecastModel {
    std::unique_ptr<OpenLoopModel> open_loop;
    std::vector<ArModel> ar_models;  // index = lead, size = horizon_l
    int horizon_l = 12;

    std::string serialize() const;

    double sigma_at(int lead) const;  // held at sigma(L-1) beyond the horizon
};

ExogForecastModel deserialize_exog_model(const std::string& blob);

struct TrainExogConfig {
    int horizon_l = 12;
    int max_memory = 12;  // AR memory selected in {1..max_memory} per lead
    KernelRidgeConfig kernel;
};

/// Trains the open-loop model and, on its residuals, one AR model per lead
/// with memory chosen by validation RMSE.
ExogForecastModel train_exog_model(const std::vector<WeatherPoint>& features,
                                   const std::vector<double>& targets,
                                   const TrainExogConfig& cfg = {});

struct ForecastResult {
    std::vector<double> w_hat;  // kW, one entry per step ahead
    bool open_loop_only = false;  // insufficient error history
};

/// w_hat(k+lead|k) = open-loop + AR correction for lead < L, open-loop alone
/// beyond. recent_errors is ordered oldest -> newest.
ForecastResult full_forecast(const ExogForecastModel& model,
                             const std::vector<double>& recent_errors,
                             const std::vector<WeatherPoint>& weather);

/// Pessimism weight: 1 below -10 degC outdoors, 1.5 otherwise.
double pessimism_lambda(double t_out);

/// Subtracts lambda(k)*sigma(k) from each entry; sigma is held at its last
/// in-horizon value beyond lead L-1.
std::vector<double> pessimize(const std::vector<double>& w_hat,
                              const ExogForecastModel& model,
                              const std::vector<double>& t_out);

/// Explicit-schedule variant (used by tests and tuning experiments).
std::vector<double> pessimize(const std::vector<double>& w_hat,
                              const std::vector<double>& sigmas,
                              const std::vector<double>& lambdas);

/// Hourly water-draw heat-transfer history (kW), newest last.
struct WaterDrawHistory {
    std::vector<EpochSeconds> timestamps;  // hourly spacing
    std::vector<double> w_w;               // kW, >= 0
    int retention_days = 30;

    void append(EpochSeconds t, double value);  // drops data beyond retention
};

struct ScenarioSet {
    std::vector<std::vector<double>> scenarios;  // S trajectories of K steps, kW
    bool padded = false;  // insufficient history; repeats/zeros were used
};

struct WaterScenarioConfig {
    int lookback_hours = 8;
    int horizon_hours = 12;
    int steps_per_hour = 12;  // 5-minute control step
};

/// Ranks historical days by mean absolute error between their lookback window
/// (ending at the same clock time as `now`) and the live window, then returns
/// the continuations of the `s` best days resampled to the control step.
/// Equal-MAE ties break toward the earliest day.
ScenarioSet water_scenarios(const WaterDrawHistory& history, EpochSeconds now,
                            int s, const WaterScenarioConfig& cfg = {});

struct UncontrolledProfile {
    std::vector<double> q_alpha;  // 24 entries, amps per hour-of-day
    double alpha = 0.99;
    bool interpolated = false;  // some hours had no data

    double at_hour(double hour) const;
};

/// Per-hour-of-day empirical alpha-quantile of uncontrolled current.
/// Requires >= 7 days of coverage overall; hours with no data are
/// interpolated from neighbors and flagged.
UncontrolledProfile uncontrolled_quantiles(
    const std::vector<EpochSeconds>& timestamps,
    const std::vector<double>& current_a, double alpha);

/// Linear-interpolation empirical quantile (order statistics at (n-1)*alpha).
double empirical_quantile(std::vector<double> values, double alpha);

/// CSV loaders for the module's external formats.
struct WeatherSeries {
    std::vector<EpochSeconds> timestamps;
    std::vector<double> t_out, wind, ghi;
};
WeatherSeries load_weather_csv(const std::string& path);
WaterDrawHistory load_water_csv(const std::string& path);

}  // namespace ampguard::forecast
