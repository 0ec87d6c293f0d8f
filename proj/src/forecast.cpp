#include "ampguard/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "ampguard/csv.hpp"
#include "ampguard/kvfile.hpp"

namespace ampguard::forecast {

namespace {

constexpr int kNumFeatures = 5;
constexpr const char* kExogTag = "ampguard-exog-model v1";
constexpr const char* kKernelTag = "kernel-ridge v1";

Eigen::Matrix<double, kNumFeatures, 1> raw_features(const WeatherPoint& p) {
    Eigen::Matrix<double, kNumFeatures, 1> f;
    double ang = 2.0 * M_PI * p.hour_of_day / 24.0;
    f << std::sin(ang), std::cos(ang), p.t_out, p.wind, p.ghi;
    return f;
}

class KernelRidgeModel final : public OpenLoopModel {
public:
    Eigen::MatrixXd train_x;  // n x kNumFeatures, standardized
    Eigen::VectorXd alpha;    // n
    Eigen::VectorXd mean, sd;  // feature standardization
    double bandwidth = 1.0;
    double y_mean = 0.0;

    double predict(const WeatherPoint& p) const override {
        Eigen::VectorXd z = standardize(raw_features(p));
        double acc = y_mean;
        for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
            double d2 = (train_x.row(i).transpose() - z).squaredNorm();
            acc += alpha(i) * std::exp(-d2 / (2.0 * bandwidth * bandwidth));
        }
        return acc;
    }

    Eigen::VectorXd standardize(const Eigen::VectorXd& f) const {
        return (f - mean).cwiseQuotient(sd);
    }

    std::string serialize() const override {
        std::ostringstream out;
        out << kKernelTag << "\n";
        out << train_x.rows() << " " << train_x.cols() << "\n";
        out << format_double(bandwidth) << " " << format_double(y_mean) << "\n";
        auto write_vec = [&out](const Eigen::VectorXd& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i)
                out << (i ? " " : "") << format_double(v(i));
            out << "\n";
        };
        write_vec(mean);
        write_vec(sd);
        write_vec(alpha);
        for (Eigen::Index i = 0; i < train_x.rows(); ++i)
            write_vec(train_x.row(i).transpose());
        return out.str();
    }
};

double median_of(std::vector<double> v) {
    if (v.empty()) return 1.0;
    size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

}  // namespace

std::unique_ptr<OpenLoopModel> train_open_loop(
    const std::vector<WeatherPoint>& features, const std::vector<double>& targets,
    const KernelRidgeConfig& cfg) {
    if (features.size() != targets.size())
        throw std::invalid_argument("train_open_loop: feature/target length mismatch");
    if (features.size() < 50)
        throw std::invalid_argument("train_open_loop: need >= 50 samples");

    // Uniform subsample to bound the kernel system size.
    std::vector<size_t> idx;
    size_t n_all = features.size();
    size_t n = std::min<size_t>(n_all, static_cast<size_t>(cfg.max_train_points));
    idx.reserve(n);
    for (size_t i = 0; i < n; ++i) idx.push_back(i * n_all / n);

    Eigen::MatrixXd x(n, kNumFeatures);
    Eigen::VectorXd y(n);
    for (size_t i = 0; i < n; ++i) {
        x.row(i) = raw_features(features[idx[i]]).transpose();
        y(i) = targets[idx[i]];
    }

    auto model = std::make_unique<KernelRidgeModel>();
    model->mean = x.colwise().mean();
    Eigen::VectorXd var =
        (x.rowwise() - model->mean.transpose()).array().square().colwise().mean();
    model->sd = var.array().sqrt().max(1e-9);
    Eigen::MatrixXd z = (x.rowwise() - model->mean.transpose()).array().rowwise() /
                        model->sd.transpose().array();

    // Median pairwise distance on a bounded subsample.
    std::vector<double> dists;
    size_t stride = std::max<size_t>(1, n / 256);
    for (size_t i = 0; i < n; i += stride)
        for (size_t j = i + stride; j < n; j += stride)
            dists.push_back((z.row(i) - z.row(j)).norm());
    model->bandwidth = std::max(1e-6, median_of(std::move(dists)));

    model->y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - model->y_mean;

    Eigen::MatrixXd gram(n, n);
    double inv2h2 = 1.0 / (2.0 * model->bandwidth * model->bandwidth);
    for (size_t i = 0; i < n; ++i) {
        gram(i, i) = 1.0 + cfg.ridge;
        for (size_t j = i + 1; j < n; ++j) {
            double k = std::exp(-(z.row(i) - z.row(j)).squaredNorm() * inv2h2);
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("train_open_loop: degenerate kernel system");
    model->alpha = llt.solve(yc);
    if (!model->alpha.allFinite())
        throw std::runtime_error("train_open_loop: non-finite solution");
    model->train_x = std::move(z);
    return model;
}

std::unique_ptr<OpenLoopModel> deserialize_open_loop(const std::string& blob) {
    std::istringstream in(blob);
    std::string tag;
    std::getline(in, tag);
    if (tag != kKernelTag)
        throw std::runtime_error("open-loop model: unknown schema tag '" + tag + "'");
    auto model = std::make_unique<KernelRidgeModel>();
    Eigen::Index rows, cols;
    in >> rows >> cols >> model->bandwidth >> model->y_mean;
    if (!in || rows < 0 || cols != kNumFeatures)
        throw std::runtime_error("open-loop model: malformed header");
    auto read_vec = [&in](Eigen::Index size) {
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i) in >> v(i);
        return v;
    };
    model->mean = read_vec(cols);
    model->sd = read_vec(cols);
    model->alpha = read_vec(rows);
    model->train_x.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        model->train_x.row(i) = read_vec(cols).transpose();
    if (!in) throw std::runtime_error("open-loop model: truncated blob");
    return model;
}

double ArModel::predict(const std::vector<double>& recent_errors) const {
    if (static_cast<int>(recent_errors.size()) < memory)
        throw std::invalid_argument("ArModel::predict: insufficient error history");
    double acc = beta.empty() ? 0.0 : beta[0];
    size_t len = recent_errors.size();
    for (int i = 1; i <= memory; ++i)
        acc += beta[i] * recent_errors[len - memory + i - 1];
    return acc;
}

namespace {

struct ArDesign {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

// Row j carries [1, e(j), ..., e(j+M-1)] with target e(j+M+lead): the newest
// feature is the last residual known when the lead-step prediction is made.
ArDesign ar_design(const std::vector<double>& errors, int lead, int memory) {
    int n = static_cast<int>(errors.size());
    int rows = n - memory - lead;
    ArDesign d;
    d.x.resize(rows, memory + 1);
    d.y.resize(rows);
    for (int j = 0; j < rows; ++j) {
        d.x(j, 0) = 1.0;
        for (int i = 0; i < memory; ++i) d.x(j, i + 1) = errors[j + i];
        d.y(j) = errors[j + memory + lead];
    }
    return d;
}

}  // namespace

ArModel fit_ar_errors(const std::vector<double>& errors, int lead, int memory) {
    if (lead < 0 || memory < 1)
        throw std::invalid_argument("fit_ar_errors: lead >= 0, memory >= 1 required");
    int n = static_cast<int>(errors.size());
    if (n <= memory + lead + 1)
        throw std::invalid_argument("fit_ar_errors: series too short for memory/lead");

    ArDesign d = ar_design(errors, lead, memory);
    int rows = static_cast<int>(d.y.size());
    int train = std::max(memory + 1, rows * 2 / 3);
    train = std::min(train, rows);

    Eigen::MatrixXd xt = d.x.topRows(train);
    Eigen::VectorXd yt = d.y.head(train);
    Eigen::MatrixXd gram = xt.transpose() * xt;
    Eigen::VectorXd rhs = xt.transpose() * yt;

    ArModel m;
    m.memory = memory;
    m.lead = lead;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::VectorXd beta;
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        beta = ldlt.solve(rhs);
        ok = beta.allFinite() && (gram * beta - rhs).norm() <=
                                     1e-6 * std::max(1.0, rhs.norm());
    }
    if (!ok) {
        beta = xt.completeOrthogonalDecomposition().solve(yt);
        m.ill_conditioned = true;
    }
    m.beta.assign(beta.data(), beta.data() + beta.size());

    double ss = 0.0;
    int nval = rows - train;
    if (nval > 0) {
        Eigen::VectorXd res = d.y.tail(nval) - d.x.bottomRows(nval) * beta;
        ss = res.squaredNorm() / nval;
    } else {
        Eigen::VectorXd res = yt - xt * beta;
        ss = res.squaredNorm() / train;
    }
    m.sigma = std::sqrt(ss);
    return m;
}

double ExogForecastModel::sigma_at(int lead) const {
    if (ar_models.empty()) return 0.0;
    int idx = std::min<int>(lead, static_cast<int>(ar_models.size()) - 1);
    return ar_models[idx].sigma;
}

std::string ExogForecastModel::serialize() const {
    std::ostringstream out;
    out << kExogTag << "\n";
    out << "horizon_l " << horizon_l << "\n";
    out << "ar_models " << ar_models.size() << "\n";
    for (const auto& m : ar_models) {
        out << "ar " << m.lead << " " << m.memory << " " << format_double(m.sigma)
            << " " << (m.ill_conditioned ? 1 : 0);
        for (double b : m.beta) out << " " << format_double(b);
        out << "\n";
    }
    out << "open_loop_begin\n" << open_loop->serialize() << "open_loop_end\n";
    return out.str();
}

ExogForecastModel deserialize_exog_model(const std::string& blob) {
    std::istringstream in(blob);
    std::string line;
    std::getline(in, line);
    if (line != kExogTag)
        throw std::runtime_error("exog model: unknown schema tag '" + line + "'");
    ExogForecastModel model;
    std::string word;
    size_t count = 0;
    in >> word >> model.horizon_l;
    if (word != "horizon_l") throw std::runtime_error("exog model: malformed blob");
    in >> word >> count;
    if (word != "ar_models") throw std::runtime_error("exog model: malformed blob");
    model.ar_models.resize(count);
    for (auto& m : model.ar_models) {
        int flag = 0;
        in >> word >> m.lead >> m.memory >> m.sigma >> flag;
        if (word != "ar") throw std::runtime_error("exog model: malformed ar line");
        m.ill_conditioned = flag != 0;
        m.beta.resize(m.memory + 1);
        for (auto& b : m.beta) in >> b;
    }
    std::getline(in, line);  // finish the last ar line
    std::getline(in, line);
    if (line != "open_loop_begin")
        throw std::runtime_error("exog model: missing open-loop section");
    std::ostringstream ol;
    while (std::getline(in, line) && line != "open_loop_end") ol << line << "\n";
    model.open_loop = deserialize_open_loop(ol.str());
    return model;
}

ExogForecastModel train_exog_model(const std::vector<WeatherPoint>& features,
                                   const std::vector<double>& targets,
                                   const TrainExogConfig& cfg) {
    ExogForecastModel model;
    model.horizon_l = cfg.horizon_l;
    model.open_loop = train_open_loop(features, targets, cfg.kernel);

    std::vector<double> errors(targets.size());
    for (size_t i = 0; i < targets.size(); ++i)
        errors[i] = targets[i] - model.open_loop->predict(features[i]);

    for (int lead = 0; lead < cfg.horizon_l; ++lead) {
        ArModel best;
        bool have = false;
        for (int memory = 1; memory <= cfg.max_memory; ++memory) {
            if (static_cast<int>(errors.size()) <= memory + lead + 1) break;
            ArModel m = fit_ar_errors(errors, lead, memory);
            if (!have || m.sigma < best.sigma) {
                best = m;
                have = true;
            }
        }
        if (!have)
            throw std::invalid_argument(
                "train_exog_model: residual series too short for AR fitting");
        model.ar_models.push_back(std::move(best));
    }
    return model;
}

ForecastResult full_forecast(const ExogForecastModel& model,
                             const std::vector<double>& recent_errors,
                             const std::vector<WeatherPoint>& weather) {
    ForecastResult r;
    r.w_hat.resize(weather.size());
    for (size_t k = 0; k < weather.size(); ++k)
        r.w_hat[k] = model.open_loop->predict(weather[k]);

    int max_memory = 0;
    for (const auto& m : model.ar_models) max_memory = std::max(max_memory, m.memory);
    if (static_cast<int>(recent_errors.size()) < max_memory) {
        r.open_loop_only = true;
        return r;
    }
    int upto = std::min<int>(model.horizon_l, static_cast<int>(weather.size()));
    upto = std::min<int>(upto, static_cast<int>(model.ar_models.size()));
    for (int lead = 0; lead < upto; ++lead)
        r.w_hat[lead] += model.ar_models[lead].predict(recent_errors);
    return r;
}

double pessimism_lambda(double t_out) { return t_out < -10.0 ? 1.0 : 1.5; }

std::vector<double> pessimize(const std::vector<double>& w_hat,
                              const ExogForecastModel& model,
                              const std::vector<double>& t_out) {
    if (w_hat.size() != t_out.size())
        throw std::invalid_argument("pessimize: length mismatch");
    std::vector<double> out(w_hat.size());
    for (size_t k = 0; k < w_hat.size(); ++k)
        out[k] = w_hat[k] - pessimism_lambda(t_out[k]) *
                                model.sigma_at(static_cast<int>(k));
    return out;
}

std::vector<double> pessimize(const std::vector<double>& w_hat,
                              const std::vector<double>& sigmas,
                              const std::vector<double>& lambdas) {
    if (w_hat.size() != sigmas.size() || w_hat.size() != lambdas.size())
        throw std::invalid_argument("pessimize: length mismatch");
    std::vector<double> out(w_hat.size());
    for (size_t k = 0; k < w_hat.size(); ++k)
        out[k] = w_hat[k] - lambdas[k] * sigmas[k];
    return out;
}

void WaterDrawHistory::append(EpochSeconds t, double value) {
    if (!timestamps.empty() && t <= timestamps.back())
        throw std::invalid_argument("WaterDrawHistory: timestamps must increase");
    timestamps.push_back(t);
    w_w.push_back(std::max(0.0, value));
    EpochSeconds cutoff = t - static_cast<EpochSeconds>(retention_days) * kSecondsPerDay;
    size_t drop = 0;
    while (drop < timestamps.size() && timestamps[drop] < cutoff) ++drop;
    if (drop > 0) {
        timestamps.erase(timestamps.begin(), timestamps.begin() + drop);
        w_w.erase(w_w.begin(), w_w.begin() + drop);
    }
}

ScenarioSet water_scenarios(const WaterDrawHistory& history, EpochSeconds now,
                            int s, const WaterScenarioConfig& cfg) {
    if (s < 1) throw std::invalid_argument("water_scenarios: s >= 1 required");
    const auto& ts = history.timestamps;
    const auto& ww = history.w_w;
    ScenarioSet set;

    // Index hourly entries by timestamp for O(1) day-shifted lookups.
    auto index_of = [&](EpochSeconds t) -> int {
        auto it = std::lower_bound(ts.begin(), ts.end(), t);
        if (it == ts.end() || *it != t) return -1;
        return static_cast<int>(it - ts.begin());
    };

    std::vector<double> live(cfg.lookback_hours);
    bool live_ok = true;
    for (int h = 0; h < cfg.lookback_hours; ++h) {
        int i = index_of(now - static_cast<EpochSeconds>(cfg.lookback_hours - h) *
                                   kSecondsPerHour);
        if (i < 0) {
            live_ok = false;
            break;
        }
        live[h] = ww[i];
    }

    struct Candidate {
        double mae;
        EpochSeconds day_anchor;
        int start_index;  // of the continuation's first hour
    };
    std::vector<Candidate> candidates;
    if (live_ok) {
        for (int day = 1; day <= history.retention_days; ++day) {
            EpochSeconds anchor = now - static_cast<EpochSeconds>(day) * kSecondsPerDay;
            double mae = 0.0;
            bool ok = true;
            for (int h = 0; h < cfg.lookback_hours && ok; ++h) {
                int i = index_of(anchor -
                                 static_cast<EpochSeconds>(cfg.lookback_hours - h) *
                                     kSecondsPerHour);
                if (i < 0)
                    ok = false;
                else
                    mae += std::abs(ww[i] - live[h]);
            }
            int cont = index_of(anchor);
            if (!ok || cont < 0 ||
                cont + cfg.horizon_hours > static_cast<int>(ww.size()))
                continue;
            candidates.push_back(
                {mae / cfg.lookback_hours, anchor, cont});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.mae != b.mae) return a.mae < b.mae;
                         return a.day_anchor < b.day_anchor;  // earliest day wins
                     });

    int steps = cfg.horizon_hours * cfg.steps_per_hour;
    auto expand = [&](int start_index) {
        std::vector<double> traj(steps);
        for (int h = 0; h < cfg.horizon_hours; ++h)
            for (int j = 0; j < cfg.steps_per_hour; ++j)
                traj[h * cfg.steps_per_hour + j] = ww[start_index + h];
        return traj;
    };

    for (int i = 0; i < s; ++i) {
        if (i < static_cast<int>(candidates.size())) {
            set.scenarios.push_back(expand(candidates[i].start_index));
        } else if (!candidates.empty()) {
            set.scenarios.push_back(expand(candidates[0].start_index));
            set.padded = true;
        } else {
            set.scenarios.emplace_back(steps, 0.0);
            set.padded = true;
        }
    }
    return set;
}

double empirical_quantile(std::vector<double> values, double alpha) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("empirical_quantile: alpha in (0,1) required");
    std::sort(values.begin(), values.end());
    double pos = alpha * (values.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double UncontrolledProfile::at_hour(double hour) const {
    int h = static_cast<int>(hour) % 24;
    if (h < 0) h += 24;
    return q_alpha[h];
}

UncontrolledProfile uncontrolled_quantiles(
    const std::vector<EpochSeconds>& timestamps,
    const std::vector<double>& current_a, double alpha) {
    if (timestamps.size() != current_a.size())
        throw std::invalid_argument("uncontrolled_quantiles: length mismatch");
    if (timestamps.empty() ||
        timestamps.back() - timestamps.front() < 7 * kSecondsPerDay)
        throw std::invalid_argument("uncontrolled_quantiles: need >= 7 days of data");

    std::vector<std::vector<double>> by_hour(24);
    for (size_t i = 0; i < timestamps.size(); ++i) {
        int h = static_cast<int>(hour_of_day(timestamps[i]));
        by_hour[h].push_back(current_a[i]);
    }

    UncontrolledProfile profile;
    profile.alpha = alpha;
    profile.q_alpha.assign(24, -1.0);
    for (int h = 0; h < 24; ++h)
        if (!by_hour[h].empty())
            profile.q_alpha[h] = empirical_quantile(by_hour[h], alpha);

    // Interpolate empty hours from nearest populated neighbors (circular).
    for (int h = 0; h < 24; ++h) {
        if (profile.q_alpha[h] >= 0.0) continue;
        profile.interpolated = true;
        int prev = h, next = h;
        for (int d = 1; d <= 24; ++d) {
            prev = (h - d + 24) % 24;
            if (profile.q_alpha[prev] >= 0.0) break;
        }
        for (int d = 1; d <= 24; ++d) {
            next = (h + d) % 24;
            if (profile.q_alpha[next] >= 0.0) break;
        }
        if (profile.q_alpha[prev] < 0.0)
            throw std::invalid_argument("uncontrolled_quantiles: no data at all");
        profile.q_alpha[h] = 0.5 * (profile.q_alpha[prev] + profile.q_alpha[next]);
    }
    return profile;
}

WeatherSeries load_weather_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_columns(t, {"timestamp", "t_out", "wind", "ghi"}, path);
    int ct = t.column("timestamp"), co = t.column("t_out"), cw = t.column("wind"),
        cg = t.column("ghi");
    WeatherSeries s;
    for (const auto& row : t.rows) {
        s.timestamps.push_back(parse_iso8601(row[ct]));
        s.t_out.push_back(std::stod(row[co]));
        s.wind.push_back(std::stod(row[cw]));
        s.ghi.push_back(std::stod(row[cg]));
    }
    return s;
}

WaterDrawHistory load_water_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_columns(t, {"timestamp", "w_w_kw"}, path);
    int ct = t.column("timestamp"), cw = t.column("w_w_kw");
    WaterDrawHistory h;
    h.retention_days = 1 << 20;  // keep everything that is loaded
    for (const auto& row : t.rows)
        h.append(parse_iso8601(row[ct]), std::stod(row[cw]));
    h.retention_days = 30;
    return h;
}

}  // namespace ampguard::forecast
