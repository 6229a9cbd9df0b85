#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ghzw/analysis.hpp"
#include "ghzw/povm.hpp"
#include "ghzw/states.hpp"
#include "ghzw/tomography.hpp"

using namespace ghzw;

namespace {

std::vector<CountRecord> poisson_counts(const DensityMatrix& rho, double shots,
                                        std::uint64_t seed) {
    SimulationOptions opts;
    opts.shots_per_setting = shots;
    opts.noise = NoiseModel::poisson;
    opts.seed = seed;
    return simulate_counts(rho, opts);
}

}  // namespace

TEST(FidelityPure, CanonicalValues) {
    const PureState ghz = make_ghz(3);
    EXPECT_NEAR(fidelity_pure(DensityMatrix::from_pure(ghz), ghz), 1.0, 1e-14);
    EXPECT_NEAR(fidelity_pure(DensityMatrix::maximally_mixed(3), ghz), 0.125, 1e-14);
    const auto out = convert_ghz_to_w(3, FilterStrength::from_a_squared(0.38));
    EXPECT_NEAR(fidelity_pure(DensityMatrix::from_pure(out.output_state), make_w_prime(3)),
                3.0 / (0.38 * 0.38 + 3.0), 1e-13);
}

TEST(FidelityPure, DimensionMismatchThrows) {
    EXPECT_THROW(fidelity_pure(DensityMatrix::maximally_mixed(2), make_ghz(3)),
                 std::invalid_argument);
}

TEST(FidelityPure, LinearInRho) {
    Rng rng(3);
    PureState a = make_ghz(3), b = make_w_prime(3);
    for (int q = 0; q < 3; ++q) {
        a = apply_local(random_local_unitary(rng), q, a);
        b = apply_local(random_local_unitary(rng), q, b);
    }
    const PureState target = make_w_hv(3);
    for (double p : {0.0, 0.25, 0.6, 1.0}) {
        Mat mix = p * DensityMatrix::from_pure(a).matrix +
                  (1.0 - p) * DensityMatrix::from_pure(b).matrix;
        const double lhs = fidelity_pure(DensityMatrix(3, mix), target);
        const double rhs = p * fidelity_pure(DensityMatrix::from_pure(a), target) +
                           (1.0 - p) * fidelity_pure(DensityMatrix::from_pure(b), target);
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(LocalRotationParams, RoundTripAndUnitarity) {
    LocalRotationParams p;
    p.angles = {{0.3, 1.1, -0.7}, {2.0, 0.4, 0.9}, {0.0, M_PI / 2.0, M_PI}};
    const Eigen::VectorXd v = p.to_vector();
    const LocalRotationParams q = LocalRotationParams::from_vector(v);
    EXPECT_EQ(q.n_qubits(), 3);
    for (const auto& u : q.unitaries()) EXPECT_TRUE(is_unitary(u));
}

TEST(LocalOpt, CanonicalGhzIsFixedPoint) {
    const auto res =
        fidelity_local_optimized(DensityMatrix::from_pure(make_ghz(3)), TargetFamily::ghz_g);
    EXPECT_GE(res.fidelity, 1.0 - 1e-9);
}

TEST(LocalOpt, GhzAgainstWFamilyIsThreeQuarters) {
    const auto res =
        fidelity_local_optimized(DensityMatrix::from_pure(make_ghz(3)), TargetFamily::w_g);
    EXPECT_NEAR(res.fidelity, 0.75, 1e-9);
}

TEST(LocalOpt, RecoversRandomProductRotations) {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        DensityMatrix rho = DensityMatrix::from_pure(make_ghz(3));
        for (int q = 0; q < 3; ++q) rho = apply_local(random_local_unitary(rng), q, rho);
        const auto res = fidelity_local_optimized(rho, TargetFamily::ghz_g);
        EXPECT_GE(res.fidelity, 0.9999) << "trial " << trial;
    }
}

TEST(LocalOpt, NeverBelowCanonicalFidelity) {
    const auto out = convert_ghz_to_w(3, FilterStrength::from_a_squared(0.38));
    const DensityMatrix rho = DensityMatrix::from_pure(out.output_state);
    const auto ghz_opt = fidelity_local_optimized(rho, TargetFamily::ghz_g);
    const auto w_opt = fidelity_local_optimized(rho, TargetFamily::w_g);
    EXPECT_GE(ghz_opt.fidelity, fidelity_pure(rho, make_ghz(3)) - 1e-12);
    EXPECT_GE(w_opt.fidelity, fidelity_pure(rho, make_w_hv(3)) - 1e-12);
    EXPECT_GE(w_opt.fidelity, fidelity_pure(rho, make_w_prime(3)) - 1e-12);
    // for the filtered ideal state the canonical members are already optimal
    EXPECT_NEAR(ghz_opt.fidelity, fidelity_ghz3_analytic(FilterStrength::from_a_squared(0.38)),
                1e-7);
    EXPECT_NEAR(w_opt.fidelity, fidelity_w3_analytic(FilterStrength::from_a_squared(0.38)),
                1e-7);
}

TEST(LocalOpt, InvariantUnderProductRotations) {
    const auto out = convert_ghz_to_w(3, FilterStrength::from_a_squared(0.5));
    DensityMatrix rho = DensityMatrix::from_pure(out.output_state);
    const double base = fidelity_local_optimized(rho, TargetFamily::w_g).fidelity;
    Rng rng(15);
    DensityMatrix rotated = rho;
    for (int q = 0; q < 3; ++q) rotated = apply_local(random_local_unitary(rng), q, rotated);
    const double moved = fidelity_local_optimized(rotated, TargetFamily::w_g).fidelity;
    EXPECT_NEAR(base, moved, 1e-6);
}

TEST(LocalOpt, ReturnedParamsReproduceFidelity) {
    Rng rng(9);
    DensityMatrix rho = DensityMatrix::from_pure(make_ghz(3));
    for (int q = 0; q < 3; ++q) rho = apply_local(random_local_unitary(rng), q, rho);
    const auto res = fidelity_local_optimized(rho, TargetFamily::ghz_g);
    const PureState rotated = rotate_target(canonical_target(TargetFamily::ghz_g, 3), res.params);
    EXPECT_NEAR(fidelity_pure(rho, rotated.normalized()), res.fidelity, 1e-10);
}

TEST(StatisticRegistry, NamesAndLookup) {
    for (const char* name : {"fidelity_ghz_canonical", "fidelity_w_canonical",
                             "fidelity_ghz_local_opt", "fidelity_w_local_opt"})
        EXPECT_NO_THROW(lookup_statistic(name));
    EXPECT_THROW(lookup_statistic("tangle"), std::invalid_argument);
    const DensityMatrix ghz = DensityMatrix::from_pure(make_ghz(3));
    EXPECT_NEAR(lookup_statistic("fidelity_ghz_canonical")(ghz), 1.0, 1e-14);
    EXPECT_NEAR(lookup_statistic("fidelity_w_canonical")(ghz), 0.75, 1e-13);
}

TEST(MonteCarlo, HighStatisticsGhzHasSmallSpread) {
    const auto records = poisson_counts(DensityMatrix::from_pure(make_ghz(3)), 1e5, 101);
    MonteCarloOptions opts;
    opts.n_trials = 25;
    opts.seed = 7;
    const auto rep = monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, opts);
    EXPECT_LT(rep.std_dev, 0.01);
    EXPECT_GT(rep.point_estimate, 0.99);
    EXPECT_EQ(rep.n_failed, 0);
    EXPECT_EQ(static_cast<int>(rep.samples.size()), 25);
}

TEST(MonteCarlo, DeterministicGivenSeed) {
    const auto records = poisson_counts(DensityMatrix::from_pure(make_w_prime(3)), 2000, 5);
    MonteCarloOptions opts;
    opts.n_trials = 2;
    opts.seed = 99;
    const auto a = monte_carlo_uncertainty(records, "fidelity_w_canonical", 3, opts);
    const auto b = monte_carlo_uncertainty(records, "fidelity_w_canonical", 3, opts);
    EXPECT_EQ(a.std_dev, b.std_dev);
    EXPECT_EQ(a.point_estimate, b.point_estimate);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i], b.samples[i]);
}

TEST(MonteCarlo, ThreadedRunMatchesSequential) {
    const auto records = poisson_counts(DensityMatrix::from_pure(make_ghz(3)), 3000, 12);
    MonteCarloOptions seq;
    seq.n_trials = 12;
    seq.seed = 3;
    MonteCarloOptions par = seq;
    par.threads = 4;
    const auto a = monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, seq);
    const auto b = monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, par);
    EXPECT_EQ(a.std_dev, b.std_dev);
    for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i], b.samples[i]);
}

TEST(MonteCarlo, PoissonScalingAcrossShotLevels) {
    // The near-sqrt(100) spread ratio holds for a state whose GHZ-fidelity
    // is away from the F = 1 boundary; the converted state (F ~ 0.91) is
    // the natural one. At the boundary the PSD constraint squashes the
    // spread and the ratio grows to ~100 (covered by the assertion below).
    MonteCarloOptions opts;
    opts.n_trials = 40;
    opts.seed = 2;
    opts.threads = 2;
    const DensityMatrix truth = DensityMatrix::from_pure(
        convert_ghz_to_w(3, FilterStrength::from_a_squared(0.38)).output_state);
    const auto lo = monte_carlo_uncertainty(poisson_counts(truth, 1e3, 21),
                                            "fidelity_ghz_canonical", 3, opts);
    const auto hi = monte_carlo_uncertainty(poisson_counts(truth, 1e5, 22),
                                            "fidelity_ghz_canonical", 3, opts);
    const double ratio = lo.std_dev / hi.std_dev;
    EXPECT_GT(ratio, 2.0);
    EXPECT_LT(ratio, 50.0);

    // boundary regime: ideal-GHZ data, spread shrinks much faster
    const DensityMatrix ghz = DensityMatrix::from_pure(make_ghz(3));
    const auto blo = monte_carlo_uncertainty(poisson_counts(ghz, 1e3, 31),
                                             "fidelity_ghz_canonical", 3, opts);
    const auto bhi = monte_carlo_uncertainty(poisson_counts(ghz, 1e5, 32),
                                             "fidelity_ghz_canonical", 3, opts);
    EXPECT_GT(blo.std_dev / bhi.std_dev, 30.0);
}

TEST(MonteCarlo, SpreadStableWhenDoublingTrials) {
    const auto records = poisson_counts(DensityMatrix::from_pure(make_ghz(3)), 2000, 8);
    MonteCarloOptions a;
    a.n_trials = 100;
    a.seed = 40;
    MonteCarloOptions b = a;
    b.n_trials = 200;
    const auto ra = monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, a);
    const auto rb = monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, b);
    EXPECT_LT(std::abs(ra.std_dev - rb.std_dev) / ra.std_dev, 0.25);
}

TEST(MonteCarlo, FailurePaths) {
    const auto records = poisson_counts(DensityMatrix::from_pure(make_ghz(3)), 1000, 1);
    MonteCarloOptions opts;
    opts.n_trials = 1;
    EXPECT_THROW(monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, opts),
                 std::invalid_argument);
    opts.n_trials = 4;
    opts.mle.max_iterations = 0;  // forces every trial to come back unconverged
    EXPECT_THROW(monte_carlo_uncertainty(records, "fidelity_ghz_canonical", 3, opts),
                 std::runtime_error);
}

TEST(ConversionReport, IdenticalStatesGiveIdenticalColumns) {
    const DensityMatrix rho = DensityMatrix::from_pure(make_w_prime(3));
    ConversionReportOptions opts;
    opts.local_optimized = false;
    const auto report = conversion_report(rho, rho, opts);
    ASSERT_EQ(report.rows.size(), 2u);
    for (const auto& row : report.rows) EXPECT_EQ(row.before.value, row.after.value);
}

TEST(ConversionReport, IdealConversionNumbers) {
    const auto s = FilterStrength::from_a_squared(0.38);
    const DensityMatrix in = DensityMatrix::from_pure(make_ghz(3));
    const DensityMatrix out =
        DensityMatrix::from_pure(convert_ghz_to_w(3, s).output_state);
    ConversionReportOptions opts;
    opts.local_optimized = true;
    const auto report = conversion_report(in, out, opts);
    ASSERT_EQ(report.rows.size(), 4u);
    EXPECT_EQ(report.rows[0].statistic, "fidelity_ghz_canonical");
    EXPECT_NEAR(report.rows[0].before.value, 1.0, 1e-12);
    EXPECT_NEAR(report.rows[0].after.value, fidelity_ghz3_analytic(s), 1e-12);
    EXPECT_EQ(report.rows[1].statistic, "fidelity_w_canonical");
    EXPECT_NEAR(report.rows[1].before.value, 0.75, 1e-12);
    EXPECT_NEAR(report.rows[1].after.value, fidelity_w3_analytic(s), 1e-12);
    // the locally optimized rows: W overlap rises 0.75 -> 0.954, GHZ falls 1 -> 0.908
    EXPECT_NEAR(report.rows[2].before.value, 1.0, 1e-7);
    EXPECT_NEAR(report.rows[2].after.value, fidelity_ghz3_analytic(s), 1e-7);
    EXPECT_NEAR(report.rows[3].before.value, 0.75, 1e-7);
    EXPECT_NEAR(report.rows[3].after.value, fidelity_w3_analytic(s), 1e-7);
    EXPECT_FALSE(report.rows[0].before.std_dev.has_value());
}

TEST(ConversionReport, ReferenceValuesAreCarriedVerbatim) {
    const ReferenceExperiment ref;
    EXPECT_DOUBLE_EQ(ref.f_ghz_g_in, 0.794);
    EXPECT_DOUBLE_EQ(ref.f_ghz_g_in_err, 0.016);
    EXPECT_DOUBLE_EQ(ref.f_w_g_in, 0.605);
    EXPECT_DOUBLE_EQ(ref.f_w_g_in_err, 0.019);
    EXPECT_DOUBLE_EQ(ref.f_ghz_g_out, 0.598);
    EXPECT_DOUBLE_EQ(ref.f_ghz_g_out_err, 0.025);
    EXPECT_DOUBLE_EQ(ref.f_w_g_out, 0.684);
    EXPECT_DOUBLE_EQ(ref.f_w_g_out_err, 0.024);
    EXPECT_DOUBLE_EQ(ref.a_squared, 0.38);
}

TEST(ConversionReport, MonteCarloErrorsAttached) {
    const DensityMatrix in = DensityMatrix::from_pure(make_ghz(3));
    const DensityMatrix out = DensityMatrix::from_pure(
        convert_ghz_to_w(3, FilterStrength::from_a_squared(0.38)).output_state);
    ConversionReportOptions opts;
    opts.local_optimized = false;
    opts.records_before = poisson_counts(in, 2000, 61);
    opts.records_after = poisson_counts(out, 2000, 62);
    opts.mc_trials = 10;
    opts.seed = 9;
    const auto report = conversion_report(in, out, opts);
    for (const auto& row : report.rows) {
        ASSERT_TRUE(row.before.std_dev.has_value());
        ASSERT_TRUE(row.after.std_dev.has_value());
        EXPECT_GE(*row.before.std_dev, 0.0);
        EXPECT_LT(*row.before.std_dev, 0.2);
    }
}
