#pragma once

#include <string>
#include <vector>

#include "ampguard/devices.hpp"
#include "ampguard/forecast.hpp"
#include "ampguard/milp.hpp"
#include "ampguard/thermal.hpp"

namespace ampguard::mpc {

/// Time-invariant problem data: prices, limits, horizon shape, and the
/// identified device/thermal models.
struct MpcConfig {
    double pi_i = 1e6;        // $/A, current violation price
    double i_limit = 100.0;   // A
    double dt = 1.0 / 12.0;   // h
    int num_scenarios = 8;
    int horizon_steps = 144;
    double pi_e = 0.14;  // $/kWh
    double t_lb = 18.5, t_ub = 23.0;     // degC air comfort bounds
    double tw_lb = 43.3, tw_ub = 60.0;   // degC water comfort bounds
    double setpoint_lb = 17.0, setpoint_ub = 23.0;  // thermostat actuation range
    double water_slack_price = 1000.0;   // $/degC/h on softened water floor
    double t_pref_day = 21.0, t_pref_night = 19.5;
    int day_start_hour = 7, day_end_hour = 22;

    thermal::ThermalParams envelope;
    thermal::TrackingParams tracking;
    devices::HeatPumpModel hp;
    devices::WaterHeaterModel wh;
};

/// Per-solve data, each schedule one entry per horizon step.
struct MpcInputs {
    double t0 = 20.0;   // degC, measured indoor temperature
    double tw0 = 49.0;  // degC, measured water temperature
    std::vector<double> theta;     // effective boundary temperature
    std::vector<double> eta;       // COP schedule
    std::vector<double> w_pess;    // pessimized exogenous power forecast, kW
    std::vector<double> q_alpha;   // uncontrolled-current quantile, A
    std::vector<double> t_pref;    // air preference, degC
    std::vector<double> tw_pref;   // water preference, degC
    std::vector<double> pi_t;      // $/degC/h
    std::vector<double> pi_w;      // $/degC/h
    std::vector<std::vector<double>> water_scenarios;  // S x K, kW
    double current_draw_kw = -1.0;  // observed draw at k=0; <0 = use scenario mean
};

enum class Quantity {
    air_temp,       // T, steps 0..K
    water_temp,     // T_w, steps 0..K
    setpoint,       // steps 0..K-1
    hp_thermal,     // Q, kW
    hp_current,     // A
    wh_current,     // A
    hp_on,          // binary
    backup_stage,   // {0,2,3,4}
    wh_on,          // binary
    comfort_air,    // |setpoint - pref| epigraph
    comfort_water,  // |T_w - pref| epigraph
    water_slack,    // softened water floor
    hinge,          // shared worst-violation scalar (scenario/step ignored)
    ev_on,          // binary, steps 0..K-1
    ev_soc,         // kWh, steps 0..K
    ev_switch       // binary, steps 0..K-2
};

const char* to_string(Quantity q);

struct EvSpec {
    devices::EvModel model;
    std::vector<bool> available;  // per step
    int deadline_step = 0;        // soc(deadline_step) must reach target
    double target_soc = -1.0;     // kWh; <0 means full capacity
};

/// The compiled standard-form MILP plus the bookkeeping needed to read
/// solutions back in problem terms.
struct MpcProblem {
    milp::MilpProblem milp;
    MpcConfig config;
    MpcInputs inputs;  // echoed (k=0 draws already reconciled)
    int horizon_steps = 0;
    int num_scenarios = 0;
    bool has_ev = false;
    EvSpec ev;
    std::vector<int> hinge_rows;  // a_in row per (s*K + k)
    std::vector<std::string> warnings;

    int index(Quantity q, int scenario, int step) const;  // throws on bad ref
    int num_vars() const { return milp.lp.num_vars; }
};

/// Compiles the scenario MPC into a mixed-integer linear program: worst-case
/// current hinge and comfort absolute values via epigraph variables, exact
/// discrete dynamics and tracking as equalities, semicontinuous HP capacity,
/// first-step action consistency, and a priced slack on the water floor.
/// Infeasible initial states relax the temperature bounds along the tracking
/// reachable path, with a warning recorded.
MpcProblem build_problem(const MpcConfig& config, const MpcInputs& inputs);

/// Rebuilds the problem with an EV charging block: on/off charger binaries,
/// battery integrator, full-by-deadline bound, charger current inside every
/// scenario's hinge rows, and the switch-count constraint linearized with
/// ancillary binaries. Throws std::invalid_argument when the deadline is
/// provably unreachable.
MpcProblem add_ev(const MpcProblem& problem, const EvSpec& ev);

struct ScenarioPlan {
    std::vector<double> t, tw, tset, q, i_hp, i_wh;
    std::vector<int> z, zr, zw;
};

struct MpcSolution {
    double air_setpoint = 0.0;    // degC, actuation for the coming step
    double water_setpoint = 0.0;  // degC, == planned T_w(1)
    double objective = 0.0;
    double gap = 0.0;
    milp::MilpStatus status = milp::MilpStatus::infeasible;
    double worst_violation = 0.0;  // A, hinge variable
    std::vector<ScenarioPlan> plans;
    std::vector<int> ev_on;  // empty when no EV block
};

/// Reads actions out of a solver result, checking first-step consistency
/// across scenarios (throws std::logic_error beyond 1e-6: that indicates a
/// constraint-encoding bug, not a data problem).
MpcSolution extract_actions(const MpcProblem& problem,
                            const milp::MilpResult& result);

/// Direct evaluation of the nonlinear objective (hinge and absolute values
/// computed exactly) on a raw variable vector; used to validate the epigraph
/// encoding.
double evaluate_objective_direct(const MpcProblem& problem,
                                 const std::vector<double>& x);

/// Space-heating discomfort price, $/degC/h: max(0, -0.24*t_out + 1.2).
double comfort_price(double t_out);

struct WaterPrice {
    double pi_w;     // $/degC/h
    double tw_pref;  // degC
};

/// Water price/preference by hour: preheat windows [4,6) and [12,14) get
/// (12, 54.4); everything else (6, 48.9).
WaterPrice water_price_schedule(double hour);

/// q_alpha(k) for the step starting at hour_at_k0 + k*dt.
double current_chance_term(const forecast::UncontrolledProfile& profile,
                           double hour_at_k0, int k, double dt);

/// Air preference schedule entry for one step.
double air_preference(const MpcConfig& config, double hour);

/// Writes a solved variable vector as CSV `name,value`.
std::string solution_csv(const MpcProblem& problem, const std::vector<double>& x);

}  // namespace ampguard::mpc
