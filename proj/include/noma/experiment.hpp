#pragma once

// Experiment orchestration: flat key=value run configurations, trade-off
// sweeps across schemes and feedback modes, deterministic CSV emission, and a
// Monte Carlo cross-check harness for the ordering-only closed forms.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "noma/channel.hpp"
#include "noma/dlt.hpp"
#include "noma/ergodic.hpp"
#include "noma/partial.hpp"

namespace noma {

enum class ExperimentMode { kErgodicFull, kErgodicPartial, kDltFull, kDltPartial };
enum class SweepAxis { kRbar, kRbarPrime, kZetabar, kZetabarPrime, kPbar };

const char* mode_name(ExperimentMode mode);
const char* axis_name(SweepAxis axis);

struct ExperimentConfig {
    double d1_km = 0.1;
    double d2_km = 0.5;
    double psd_dbm_hz = -169.0;
    double bandwidth_hz = 1e7;
    double pbar_w = 1.0;
    double phat_w = 5.0;
    std::size_t n_states = 100000;
    std::uint64_t seed = 1;
    ExperimentMode mode = ExperimentMode::kErgodicFull;
    std::vector<Scheme> schemes;  // canonical order, no duplicates
    SweepAxis sweep_axis = SweepAxis::kRbar;
    std::vector<double> sweep_values;
    double rbar_min_bps_hz = 0.0;    // ergodic_full floor when not the swept axis
    TargetRates targets;             // outage targets for the DLT modes
    double zetabar = 1.0;            // dlt_full cap when not the swept axis
    double rbar_prime_bps_hz = 0.0;  // ergodic_partial floor when not the swept axis
    double zetabar_prime = 1.0;      // dlt_partial cap when not the swept axis
    int grid_points = 1001;          // partial-mode grid resolution per dimension
    bool refine = true;              // partial-mode local refinement pass
};

// Strict parser for the flat key=value format: '#' comments and blank lines
// are skipped; unknown keys, duplicate keys, malformed values and missing
// required keys all throw std::invalid_argument with the offending key named.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

// Cross-field validation (also run by the parser): budget within peak, at
// least one state and scheme, axis compatible with mode, sweep values sorted
// ascending and within the axis domain.
void validate_experiment_config(const ExperimentConfig& config);

struct CurvePoint {
    double axis_value = 0.0;
    Scheme scheme = Scheme::kNoma;
    // Infeasible points keep NaN metrics; they are emitted, never dropped.
    double objective = 0.0;
    double metric1 = 0.0;  // per-user average rate (ergodic) or throughput (DLT)
    double metric2 = 0.0;
    double outage1 = 0.0;  // NaN in ergodic modes
    double outage2 = 0.0;
    double avg_power = 0.0;
    double dual_gap = 0.0;  // NaN in partial modes (no dual machinery)
    bool feasible = false;
};

struct TradeoffCurve {
    Scheme scheme = Scheme::kNoma;
    std::vector<CurvePoint> points;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TradeoffCurve> curves;  // one per scheme, canonical order
    bool any_feasible = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// One header row, then one row per (axis value, scheme) in axis-major order
// with schemes in canonical order. Numbers carry 9 significant digits; the
// output is byte-identical across runs of the same config and seed.
void emit_csv(const ExperimentResult& result, std::ostream& out);
void emit_csv_file(const ExperimentResult& result, const std::string& path);

// Feasibility frontier along the mode's natural constraint axis, per scheme:
// the largest supportable rate floor for the ergodic modes, the smallest
// supportable per-user outage cap for the DLT modes.
struct FrontierPoint {
    Scheme scheme = Scheme::kNoma;
    std::string label;   // which quantity the value bounds
    double value = 0.0;
};
std::vector<FrontierPoint> feasibility_frontier(const ExperimentConfig& config);

struct ValidationRow {
    std::string name;
    double closed_form = 0.0;
    double monte_carlo = 0.0;
    double tolerance = 0.0;  // allowed |closed_form - monte_carlo|
    double deviation = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool pass = false;
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0;
};

// Compares every ordering-only closed form (two ergodic rates and two outage
// probabilities per scheme and user) against Monte Carlo over a pinned policy
// grid scaled by the config's power budget. Rates must match within 1%
// relative, outages within 3 binomial standard errors. forced_failure biases
// one closed-form value by 5% to prove the harness can detect a broken
// formula.
ValidationReport validate_partial_csit(const ExperimentConfig& config,
                                       std::size_t mc_samples = 200000,
                                       bool forced_failure = false);

// Line-oriented key=value report ending in "overall: PASS|FAIL".
void write_validation_report(const ValidationReport& report, std::ostream& out);

}  // namespace noma
