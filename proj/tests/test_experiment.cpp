#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "noma/experiment.hpp"

using namespace noma;

namespace {

ExperimentConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_experiment_config(in);
}

void expect_parse_error(const std::string& text, const std::string& needle) {
    try {
        parse_text(text);
        FAIL("expected std::invalid_argument for config:\n" << text);
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

const char* kPartialBase =
    "distances_km = 0.1, 0.5\n"
    "psd_dbm_hz = -159\n"
    "bandwidth_hz = 1e7\n"
    "pbar_w = 1\n"
    "seed = 7\n"
    "mode = ergodic_partial\n"
    "schemes = NOMA, OMA1, OMA2\n"
    "sweep_axis = rbar_prime\n"
    "sweep_values = 0.2, 0.6\n"
    "grid_points = 201\n";

std::string csv_of(const ExperimentResult& result) {
    std::ostringstream out;
    emit_csv(result, out);
    return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

TEST_CASE("config parser round trip with comments and whitespace") {
    const std::string text =
        "# experiment setup\n"
        "distances_km = 0.1 , 0.5   # near and far user\n"
        "\n"
        "psd_dbm_hz = -159\n"
        "bandwidth_hz = 1e7\n"
        "pbar_w = 2\n"
        "phat_w = 5\n"
        "n_states = 4000\n"
        "seed = 42\n"
        "mode = dlt_full\n"
        "schemes = OMA2, NOMA\n"
        "sweep_axis = zetabar\n"
        "sweep_values = 0.3, 0.5, 0.8\n"
        "rbar1_bps_hz = 2\n"
        "rbar2_bps_hz = 1.5\n"
        "grid_points = 501\n"
        "refine = false\n";
    const ExperimentConfig c = parse_text(text);
    CHECK(c.d1_km == 0.1);
    CHECK(c.d2_km == 0.5);
    CHECK(c.psd_dbm_hz == -159.0);
    CHECK(c.bandwidth_hz == 1e7);
    CHECK(c.pbar_w == 2.0);
    CHECK(c.phat_w == 5.0);
    CHECK(c.n_states == 4000);
    CHECK(c.seed == 42);
    CHECK(c.mode == ExperimentMode::kDltFull);
    REQUIRE(c.schemes.size() == 2);
    // Canonical order regardless of listing order.
    CHECK(c.schemes[0] == Scheme::kNoma);
    CHECK(c.schemes[1] == Scheme::kOma2);
    CHECK(c.sweep_axis == SweepAxis::kZetabar);
    CHECK(c.sweep_values == std::vector<double>{0.3, 0.5, 0.8});
    CHECK(c.targets.rbar1 == 2.0);
    CHECK(c.targets.rbar2 == 1.5);
    CHECK(c.grid_points == 501);
    CHECK(!c.refine);
}

TEST_CASE("config parser rejects malformed input") {
    expect_parse_error(std::string(kPartialBase) + "pbar_w = 2\n", "appears twice");
    expect_parse_error(std::string(kPartialBase) + "mystery_key = 1\n",
                       "not recognized");
    expect_parse_error(std::string(kPartialBase) + "this line has no equals\n",
                       "key = value");
    expect_parse_error(std::string(kPartialBase) + "= 3\n", "empty key");
    expect_parse_error(std::string(kPartialBase) + "refine = maybe\n",
                       "expected true or false");
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "seed = 7\nmode = ergodic_partial\nschemes = NOMA\n"
        "sweep_axis = rbar_prime\nsweep_values = 0.1\n",
        "'pbar_w' is required");
    expect_parse_error(std::string(kPartialBase) + "gibberish", "key = value");
}

TEST_CASE("config parser rejects malformed values") {
    auto swap_line = [&](const std::string& from, const std::string& to) {
        std::string text = kPartialBase;
        const auto pos = text.find(from);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, from.size(), to);
        return text;
    };
    expect_parse_error(swap_line("pbar_w = 1", "pbar_w = fast"), "cannot parse real");
    expect_parse_error(swap_line("pbar_w = 1", "pbar_w = 1.5x"),
                       "cannot parse real");
    expect_parse_error(swap_line("seed = 7", "seed = -3"),
                       "cannot parse unsigned");
    expect_parse_error(swap_line("mode = ergodic_partial", "mode = duplex"),
                       "unknown mode");
    expect_parse_error(swap_line("schemes = NOMA, OMA1, OMA2", "schemes = TDMA"),
                       "unknown scheme");
    expect_parse_error(swap_line("sweep_axis = rbar_prime", "sweep_axis = snr"),
                       "unknown axis");
    expect_parse_error(
        swap_line("distances_km = 0.1, 0.5", "distances_km = 0.1"),
        "two comma-separated");
}

TEST_CASE("config validation rejects inconsistent setups") {
    // Full-feedback modes need the peak power and the state count.
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nseed = 7\nmode = ergodic_full\nschemes = NOMA\n"
        "sweep_axis = rbar\nsweep_values = 0.1\nn_states = 100\n",
        "'phat_w' is required");
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nseed = 7\nmode = ergodic_full\nschemes = NOMA\n"
        "sweep_axis = rbar\nsweep_values = 0.1\n",
        "'n_states' is required");
    // DLT modes need explicit per-user targets unless the rate axis is swept.
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nseed = 7\nmode = dlt_partial\nschemes = NOMA\n"
        "sweep_axis = zetabar_prime\nsweep_values = 0.5\n",
        "'rbar1_bps_hz' is required");
    // Axis-mode compatibility.
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nn_states = 100\nseed = 7\nmode = ergodic_full\n"
        "schemes = NOMA\nsweep_axis = zetabar\nsweep_values = 0.5\n",
        "not applicable");
    // Sweep ordering and domains.
    expect_parse_error(
        std::string(kPartialBase).replace(std::string(kPartialBase).find("0.2, 0.6"),
                                          8, "0.6, 0.2"),
        "sorted ascending");
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nseed = 7\nmode = dlt_partial\nschemes = NOMA\n"
        "rbar1_bps_hz = 1\nrbar2_bps_hz = 1\n"
        "sweep_axis = zetabar_prime\nsweep_values = 0.5, 1.5\n",
        "[0, 1]");
    // Budget above the peak.
    expect_parse_error(
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 6\nphat_w = 5\nn_states = 100\nseed = 7\nmode = ergodic_full\n"
        "schemes = NOMA\nsweep_axis = rbar\nsweep_values = 0.1\n",
        "must not exceed phat_w");
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/path.cfg"),
                    std::runtime_error);
}

TEST_CASE("ordering-only sweep produces consistent curves and CSV") {
    const ExperimentConfig config = parse_text(kPartialBase);
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.curves.size() == 3);
    CHECK(result.any_feasible);
    CHECK(result.curves[0].scheme == Scheme::kNoma);
    CHECK(result.curves[1].scheme == Scheme::kOma1);
    CHECK(result.curves[2].scheme == Scheme::kOma2);
    for (const TradeoffCurve& curve : result.curves) {
        REQUIRE(curve.points.size() == 2);
        double previous = 1e300;
        for (const CurvePoint& p : curve.points) {
            REQUIRE(p.feasible);
            CHECK(p.metric1 >= p.axis_value - 1e-9);
            CHECK(p.metric2 >= p.axis_value - 1e-9);
            CHECK(p.objective == doctest::Approx(p.metric1 + p.metric2).epsilon(1e-12));
            CHECK(p.avg_power <= config.pbar_w + 1e-12);
            CHECK(std::isnan(p.dual_gap));
            CHECK(std::isnan(p.outage1));
            // A tighter floor can only shrink the attainable sum rate.
            CHECK(p.objective <= previous + 1e-9);
            previous = p.objective;
        }
    }
    // Scheme ordering at each axis value.
    for (std::size_t i = 0; i < 2; ++i) {
        const double noma = result.curves[0].points[i].objective;
        const double oma1 = result.curves[1].points[i].objective;
        const double oma2 = result.curves[2].points[i].objective;
        CHECK(noma >= oma2 - 1e-3);
        CHECK(oma2 >= oma1 - 1e-3);
    }

    const std::string csv = csv_of(result);
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == 1 + 2 * 3);
    CHECK(lines[0] ==
          "axis,scheme,objective,rate_or_dlt_user1,rate_or_dlt_user2,"
          "outage_user1,outage_user2,avg_power,dual_gap,status");
    // Axis-major ordering with canonical scheme order inside each block.
    CHECK(lines[1].rfind("0.2,NOMA,", 0) == 0);
    CHECK(lines[2].rfind("0.2,OMA1,", 0) == 0);
    CHECK(lines[3].rfind("0.2,OMA2,", 0) == 0);
    CHECK(lines[4].rfind("0.6,NOMA,", 0) == 0);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        CHECK(lines[i].find(",ok") != std::string::npos);
    }
    // Emission is deterministic byte for byte.
    CHECK(csv == csv_of(run_experiment(config)));
}

TEST_CASE("infeasible sweep points are emitted with NaN metrics") {
    ExperimentConfig config = parse_text(kPartialBase);
    config.sweep_values = {0.2, 50.0};
    const ExperimentResult result = run_experiment(config);
    const std::string csv = csv_of(result);
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == 7);
    CHECK(lines[4].rfind("50,NOMA,nan,nan,nan,nan,nan,nan,nan,infeasible", 0) == 0);
    CHECK(result.any_feasible);
    CHECK(!result.curves[0].points[1].feasible);
}

TEST_CASE("full-feedback ergodic sweep is feasible and ordered") {
    std::string text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nn_states = 1500\nseed = 3\nmode = ergodic_full\n"
        "schemes = NOMA, OMA1, OMA2\nsweep_axis = rbar\nsweep_values = 0.1, 0.5\n";
    const ExperimentConfig config = parse_text(text);
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.curves.size() == 3);
    // Feasibility of a recovered point is certified to the recovery tolerance
    // (1e-3 relative): with a finite ensemble the dual-replayed policy moves
    // in per-state jumps, so the caps cannot always be met exactly.
    const double power_tol = 1e-3 * (1.0 + config.pbar_w);
    for (const TradeoffCurve& curve : result.curves) {
        for (const CurvePoint& p : curve.points) {
            REQUIRE(p.feasible);
            CHECK(p.metric1 >= p.axis_value - 1e-3 * (1.0 + p.axis_value));
            CHECK(p.metric2 >= p.axis_value - 1e-3 * (1.0 + p.axis_value));
            CHECK(p.avg_power <= config.pbar_w + power_tol);
            CHECK(p.dual_gap <= 1e-2 * (1.0 + std::abs(p.objective)));
            CHECK(std::isnan(p.outage1));
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const double noma = result.curves[0].points[i].objective;
        const double oma1 = result.curves[1].points[i].objective;
        const double oma2 = result.curves[2].points[i].objective;
        CHECK(noma >= oma2 - 1e-3);
        CHECK(oma2 >= oma1 - 1e-3);
    }
}

TEST_CASE("full-feedback throughput sweep honors caps and warm starts") {
    std::string text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nn_states = 1500\nseed = 3\nmode = dlt_full\n"
        "schemes = NOMA, OMA2\nsweep_axis = zetabar\nsweep_values = 0.5, 0.9\n"
        "rbar1_bps_hz = 1\nrbar2_bps_hz = 1\n";
    const ExperimentConfig config = parse_text(text);
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.curves.size() == 2);
    const double power_tol = 1e-3 * (1.0 + config.pbar_w);
    for (const TradeoffCurve& curve : result.curves) {
        REQUIRE(curve.points.size() == 2);
        double previous = -1.0;
        for (const CurvePoint& p : curve.points) {
            REQUIRE(p.feasible);
            CHECK(p.outage1 <= p.axis_value + 1e-3 * (1.0 + p.axis_value));
            CHECK(p.outage2 <= p.axis_value + 1e-3 * (1.0 + p.axis_value));
            CHECK(p.avg_power <= config.pbar_w + power_tol);
            CHECK(p.objective ==
                  doctest::Approx(p.metric1 + p.metric2).epsilon(1e-12));
            CHECK(p.dual_gap <= 1e-2 * (1.0 + std::abs(p.objective)));
            // A looser cap admits every tighter-cap policy.
            CHECK(p.objective >= previous - 1e-3);
            previous = p.objective;
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(result.curves[0].points[i].objective >=
              result.curves[1].points[i].objective - 1e-3);
    }
}

TEST_CASE("feasibility frontier labels and scheme ordering") {
    ExperimentConfig config = parse_text(kPartialBase);
    config.grid_points = 501;
    const auto ergodic = feasibility_frontier(config);
    REQUIRE(ergodic.size() == 3);
    for (const FrontierPoint& fp : ergodic) {
        CHECK(fp.label == "rbar_prime_max");
        CHECK(fp.value > 0.0);
        CHECK(fp.value < 3.0);
    }
    CHECK(ergodic[0].scheme == Scheme::kNoma);
    CHECK(ergodic[0].value >= ergodic[2].value - 1e-6);  // NOMA vs OMA2
    CHECK(ergodic[2].value >= ergodic[1].value - 1e-6);  // OMA2 vs OMA1

    std::string dlt_text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nseed = 7\nmode = dlt_partial\nschemes = NOMA, OMA1, OMA2\n"
        "sweep_axis = zetabar_prime\nsweep_values = 0.5\n"
        "rbar1_bps_hz = 1\nrbar2_bps_hz = 1\ngrid_points = 501\n";
    const auto dlt = feasibility_frontier(parse_text(dlt_text));
    REQUIRE(dlt.size() == 3);
    for (const FrontierPoint& fp : dlt) {
        CHECK(fp.label == "zetabar_prime_min");
        CHECK(fp.value > 0.0);
        CHECK(fp.value < 1.0);
    }
    CHECK(dlt[0].value <= dlt[2].value + 1e-6);
    CHECK(dlt[2].value <= dlt[1].value + 1e-6);

    std::string full_text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nn_states = 1200\nseed = 3\nmode = ergodic_full\n"
        "schemes = NOMA\nsweep_axis = rbar\nsweep_values = 0.1\n";
    const auto full = feasibility_frontier(parse_text(full_text));
    REQUIRE(full.size() == 1);
    CHECK(full[0].label == "rbar_max");
    CHECK(full[0].value > 0.5);

    std::string dlt_full_text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nphat_w = 5\nn_states = 1200\nseed = 3\nmode = dlt_full\n"
        "schemes = NOMA\nsweep_axis = zetabar\nsweep_values = 0.5\n"
        "rbar1_bps_hz = 1\nrbar2_bps_hz = 1\n";
    const auto dlt_full = feasibility_frontier(parse_text(dlt_full_text));
    REQUIRE(dlt_full.size() == 1);
    CHECK(dlt_full[0].label == "zetabar_min");
    CHECK(dlt_full[0].value > 0.0);
    CHECK(dlt_full[0].value < 1.0);
}

TEST_CASE("validation harness passes and detects an injected fault") {
    ExperimentConfig config = parse_text(kPartialBase);
    const ValidationReport report = validate_partial_csit(config, 60000);
    CHECK(report.pass);
    CHECK(report.rows.size() >= 8);
    for (const ValidationRow& row : report.rows) {
        CHECK(row.pass);
        CHECK(row.deviation ==
              doctest::Approx(std::abs(row.closed_form - row.monte_carlo))
                  .epsilon(1e-12));
        CHECK(row.deviation <= row.tolerance);
    }
    std::ostringstream out;
    write_validation_report(report, out);
    const std::string text = out.str();
    CHECK(text.find("overall: PASS\n") != std::string::npos);

    const ValidationReport broken = validate_partial_csit(config, 60000, true);
    CHECK(!broken.pass);
    std::ostringstream bad;
    write_validation_report(broken, bad);
    CHECK(bad.str().find("overall: FAIL\n") != std::string::npos);
}

TEST_CASE("pinned golden sweep is byte identical") {
    const std::filesystem::path golden_path =
        std::filesystem::path(__FILE__).parent_path().parent_path() / "goldens" /
        "golden_small.csv";
    REQUIRE(std::filesystem::exists(golden_path));
    std::ifstream in(golden_path, std::ios::binary);
    std::ostringstream want;
    want << in.rdbuf();

    const std::string text =
        "distances_km = 0.1, 0.5\npsd_dbm_hz = -159\nbandwidth_hz = 1e7\n"
        "pbar_w = 1\nseed = 7\nmode = ergodic_partial\n"
        "schemes = NOMA, OMA1, OMA2\nsweep_axis = rbar_prime\n"
        "sweep_values = 0.2, 0.6\ngrid_points = 301\n";
    const ExperimentResult result = run_experiment(parse_text(text));
    CHECK(csv_of(result) == want.str());
}
