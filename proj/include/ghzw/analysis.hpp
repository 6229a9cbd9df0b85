// Fidelity analysis: overlap with canonical and locally-rotated target
// families, Monte Carlo uncertainty propagation through the tomography
// reconstruction, and the before/after conversion report.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzw/optimize.hpp"
#include "ghzw/povm.hpp"
#include "ghzw/random.hpp"
#include "ghzw/states.hpp"
#include "ghzw/tomography.hpp"
#include "ghzw/unitaries.hpp"

namespace ghzw {

// F = <psi|rho|psi>, clamped to [0,1].
inline double fidelity_pure(const DensityMatrix& rho, const PureState& target) {
    if (rho.n_qubits != target.n_qubits)
        throw std::invalid_argument("fidelity_pure: dimension mismatch");
    const double f = (target.amplitudes.adjoint() * rho.matrix * target.amplitudes)(0).real();
    if (f < -1e-10 - 1e-12 || f > 1.0 + 1e-10 + 1e-12)
        throw std::invalid_argument("fidelity_pure: rho is far from physical");
    return std::clamp(f, 0.0, 1.0);
}

// Per-qubit ZYZ Euler angles (alpha, beta, gamma), global phase dropped.
struct LocalRotationParams {
    std::vector<std::array<double, 3>> angles;

    int n_qubits() const { return static_cast<int>(angles.size()); }

    std::vector<LocalUnitary> unitaries() const {
        std::vector<LocalUnitary> out;
        out.reserve(angles.size());
        for (const auto& a : angles) out.push_back(euler_zyz(a[0], a[1], a[2]));
        return out;
    }

    static LocalRotationParams from_vector(const Eigen::VectorXd& x) {
        LocalRotationParams p;
        p.angles.resize(static_cast<std::size_t>(x.size() / 3));
        for (std::size_t q = 0; q < p.angles.size(); ++q)
            p.angles[q] = {x(3 * static_cast<Eigen::Index>(q)),
                           x(3 * static_cast<Eigen::Index>(q) + 1),
                           x(3 * static_cast<Eigen::Index>(q) + 2)};
        return p;
    }

    Eigen::VectorXd to_vector() const {
        Eigen::VectorXd x(3 * static_cast<Eigen::Index>(angles.size()));
        for (std::size_t q = 0; q < angles.size(); ++q)
            for (int j = 0; j < 3; ++j)
                x(3 * static_cast<Eigen::Index>(q) + j) = angles[q][static_cast<std::size_t>(j)];
        return x;
    }
};

// Target families for the local-unitary fidelity search. The canonical W_G
// member is the single-H W state (the form whose density matrix carries the
// |HVV>-type diagonals); W' lies in the same local-unitary orbit and is
// always covered through the per-qubit Hadamard start.
enum class TargetFamily { ghz_g, w_g };

inline PureState canonical_target(TargetFamily family, int n) {
    return family == TargetFamily::ghz_g ? make_ghz(n, GhzSign::plus) : make_w_hv(n);
}

inline PureState rotate_target(const PureState& target, const LocalRotationParams& params) {
    PureState out = target;
    const auto us = params.unitaries();
    for (int q = 0; q < target.n_qubits; ++q)
        out = apply_local(us[static_cast<std::size_t>(q)], q, out);
    return out;
}

struct LocalOptOptions {
    int starts = 32;            // random starts, in addition to the deterministic ones
    int max_iterations = 4000;  // per Nelder-Mead run
    double tolerance = 1e-12;
    std::uint64_t seed = 0x10ca10f5ULL;
    int threads = 1;
};

struct LocalOptResult {
    double fidelity = 0.0;
    LocalRotationParams params;
    int starts_run = 0;
    int evaluations = 0;
};

// max over product unitaries U1 (x) ... (x) Un of <t|U^dag rho U|t>, found
// by multi-start Nelder-Mead over the 3n Euler angles. Deterministic starts
// (identity, all-Hadamard) guarantee the result is never below the fidelity
// with the canonical family members.
inline LocalOptResult fidelity_local_optimized(const DensityMatrix& rho, TargetFamily family,
                                               const LocalOptOptions& options = {}) {
    const int n = rho.n_qubits;
    const PureState target = canonical_target(family, n);
    auto objective = [&rho, &target](const Eigen::VectorXd& x) {
        return fidelity_pure(rho, rotate_target(target, LocalRotationParams::from_vector(x)));
    };

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Zero(3 * n));  // identity
    {
        Eigen::VectorXd h(3 * n);  // per-qubit Hadamard: (0, pi/2, pi)
        for (int q = 0; q < n; ++q) {
            h(3 * q) = 0.0;
            h(3 * q + 1) = M_PI / 2.0;
            h(3 * q + 2) = M_PI;
        }
        starts.push_back(std::move(h));
    }
    Rng rng(options.seed);
    for (int sidx = 0; sidx < options.starts; ++sidx) {
        Eigen::VectorXd x(3 * n);
        for (int q = 0; q < n; ++q) {
            x(3 * q) = rng.uniform(0.0, 2.0 * M_PI);
            x(3 * q + 1) = std::acos(1.0 - 2.0 * rng.uniform());
            x(3 * q + 2) = rng.uniform(0.0, 2.0 * M_PI);
        }
        starts.push_back(std::move(x));
    }

    auto run_start = [&](const Eigen::VectorXd& x0) {
        return nelder_mead_maximize(objective, x0, 0.5, options.max_iterations,
                                    options.tolerance);
    };

    std::vector<NelderMeadResult> results(starts.size());
    if (options.threads > 1) {
        std::vector<std::future<void>> futs;
        const int nt = options.threads;
        for (int t = 0; t < nt; ++t)
            futs.push_back(std::async(std::launch::async, [&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < starts.size();
                     i += static_cast<std::size_t>(nt))
                    results[i] = run_start(starts[i]);
            }));
        for (auto& f : futs) f.get();
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) results[i] = run_start(starts[i]);
    }

    LocalOptResult out;
    out.starts_run = static_cast<int>(starts.size());
    const NelderMeadResult* best = nullptr;
    for (const auto& r : results) {
        out.evaluations += r.evaluations;
        if (!best || r.value > best->value) best = &r;
    }
    if (!best) throw std::runtime_error("fidelity_local_optimized: no optimizer start succeeded");

    // final polish from the incumbent
    NelderMeadResult polished =
        nelder_mead_maximize(objective, best->x, 0.02, options.max_iterations, options.tolerance);
    out.evaluations += polished.evaluations;
    const NelderMeadResult& winner = polished.value >= best->value ? polished : *best;
    out.fidelity = std::clamp(winner.value, 0.0, 1.0);
    out.params = LocalRotationParams::from_vector(winner.x);
    return out;
}

// --- named statistics over reconstructed density matrices ---

using Statistic = std::function<double(const DensityMatrix&)>;

// fidelity_w_canonical targets W' (the conversion target); the locally
// optimized variants search the whole orbit, where W and W' coincide.
inline const std::map<std::string, Statistic>& statistic_registry() {
    static const std::map<std::string, Statistic> registry = {
        {"fidelity_ghz_canonical",
         [](const DensityMatrix& rho) {
             return fidelity_pure(rho, make_ghz(rho.n_qubits, GhzSign::plus));
         }},
        {"fidelity_w_canonical",
         [](const DensityMatrix& rho) { return fidelity_pure(rho, make_w_prime(rho.n_qubits)); }},
        {"fidelity_ghz_local_opt",
         [](const DensityMatrix& rho) {
             return fidelity_local_optimized(rho, TargetFamily::ghz_g).fidelity;
         }},
        {"fidelity_w_local_opt",
         [](const DensityMatrix& rho) {
             return fidelity_local_optimized(rho, TargetFamily::w_g).fidelity;
         }},
    };
    return registry;
}

inline Statistic lookup_statistic(const std::string& name) {
    const auto& reg = statistic_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw std::invalid_argument("unknown statistic: " + name);
    return it->second;
}

struct UncertaintyReport {
    double point_estimate = 0.0;  // mean over successful trials
    double std_dev = 0.0;         // sample standard deviation
    int n_trials = 0;
    int n_failed = 0;
    std::vector<double> samples;  // per-trial values (successful trials)
};

struct MonteCarloOptions {
    int n_trials = 100;
    std::uint64_t seed = 0;
    MleOptions mle;
    int threads = 1;
};

// Poisson-resamples the raw counts around the observed values, re-runs the
// reconstruction per trial and evaluates each statistic. Trial t draws its
// own RNG stream from (seed, t), so results do not depend on scheduling.
inline std::vector<UncertaintyReport> monte_carlo_uncertainty(
    const std::vector<CountRecord>& records, const std::vector<Statistic>& statistics, int n,
    const MonteCarloOptions& options) {
    if (options.n_trials < 2)
        throw std::invalid_argument("monte_carlo_uncertainty: n_trials must be >= 2");
    if (records.empty()) throw std::invalid_argument("monte_carlo_uncertainty: no records");

    const std::size_t n_stats = statistics.size();
    std::vector<std::vector<double>> values(
        static_cast<std::size_t>(options.n_trials), std::vector<double>(n_stats, 0.0));
    std::vector<char> ok(static_cast<std::size_t>(options.n_trials), 0);

    auto run_trial = [&](int trial) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(trial)));
        std::vector<CountRecord> resampled = records;
        for (auto& r : resampled)
            r.raw_counts = rng.poisson(static_cast<double>(r.raw_counts));
        try {
            ReconstructionResult rec = reconstruct_mle(resampled, n, options.mle);
            if (!rec.converged) return;
            for (std::size_t s = 0; s < n_stats; ++s)
                values[static_cast<std::size_t>(trial)][s] = statistics[s](rec.rho);
            ok[static_cast<std::size_t>(trial)] = 1;
        } catch (const std::invalid_argument&) {
            // degenerate resample (e.g. all-zero counts): flagged as failed
        }
    };

    if (options.threads > 1) {
        std::vector<std::future<void>> futs;
        for (int t = 0; t < options.threads; ++t)
            futs.push_back(std::async(std::launch::async, [&, t] {
                for (int trial = t; trial < options.n_trials; trial += options.threads)
                    run_trial(trial);
            }));
        for (auto& f : futs) f.get();
    } else {
        for (int trial = 0; trial < options.n_trials; ++trial) run_trial(trial);
    }

    const int n_ok = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    const int n_failed = options.n_trials - n_ok;
    if (n_ok * 2 < options.n_trials)
        throw std::runtime_error("monte_carlo_uncertainty: more than half of the trials failed");

    std::vector<UncertaintyReport> reports(n_stats);
    for (std::size_t s = 0; s < n_stats; ++s) {
        auto& rep = reports[s];
        rep.n_trials = options.n_trials;
        rep.n_failed = n_failed;
        rep.samples.reserve(static_cast<std::size_t>(n_ok));
        for (int t = 0; t < options.n_trials; ++t)
            if (ok[static_cast<std::size_t>(t)])
                rep.samples.push_back(values[static_cast<std::size_t>(t)][s]);
        double mean = 0.0;
        for (double v : rep.samples) mean += v;
        mean /= static_cast<double>(rep.samples.size());
        double ss = 0.0;
        for (double v : rep.samples) ss += (v - mean) * (v - mean);
        rep.point_estimate = mean;
        rep.std_dev = std::sqrt(ss / static_cast<double>(rep.samples.size() - 1));
    }
    return reports;
}

inline UncertaintyReport monte_carlo_uncertainty(const std::vector<CountRecord>& records,
                                                 const std::string& statistic, int n,
                                                 const MonteCarloOptions& options) {
    return monte_carlo_uncertainty(records, std::vector<Statistic>{lookup_statistic(statistic)},
                                   n, options)[0];
}

// --- conversion report ---

struct ReportEntry {
    double value = 0.0;
    std::optional<double> std_dev;
};

struct ReportRow {
    std::string statistic;
    ReportEntry before;
    ReportEntry after;
};

// Published values from the original three-photon realization of this
// conversion, displayed for side-by-side comparison only: they depend on
// that experiment's unmeasurable lab noise and are not reproduction targets.
struct ReferenceExperiment {
    double a_squared = 0.38;
    double f_ghz_g_in = 0.794, f_ghz_g_in_err = 0.016;
    double f_w_g_in = 0.605, f_w_g_in_err = 0.019;
    double f_ghz_g_out = 0.598, f_ghz_g_out_err = 0.025;
    double f_w_g_out = 0.684, f_w_g_out_err = 0.024;
};

struct ConversionReport {
    std::vector<ReportRow> rows;
    ReferenceExperiment reference;
};

struct ConversionReportOptions {
    bool local_optimized = true;
    LocalOptOptions local_opt;
    // Monte Carlo errors are attached when count records are supplied.
    std::vector<CountRecord> records_before;
    std::vector<CountRecord> records_after;
    int mc_trials = 0;  // 0 disables
    std::uint64_t seed = 0;
    MleOptions mle;
    int threads = 1;
};

inline ConversionReport conversion_report(const DensityMatrix& rho_in,
                                          const DensityMatrix& rho_out,
                                          const ConversionReportOptions& options = {}) {
    if (rho_in.n_qubits != rho_out.n_qubits)
        throw std::invalid_argument("conversion_report: dimension mismatch");
    std::vector<std::string> names = {"fidelity_ghz_canonical", "fidelity_w_canonical"};
    if (options.local_optimized) {
        names.push_back("fidelity_ghz_local_opt");
        names.push_back("fidelity_w_local_opt");
    }

    std::vector<Statistic> stats;
    for (const auto& name : names) {
        if (name == "fidelity_ghz_local_opt")
            stats.push_back([opt = options.local_opt](const DensityMatrix& r) {
                return fidelity_local_optimized(r, TargetFamily::ghz_g, opt).fidelity;
            });
        else if (name == "fidelity_w_local_opt")
            stats.push_back([opt = options.local_opt](const DensityMatrix& r) {
                return fidelity_local_optimized(r, TargetFamily::w_g, opt).fidelity;
            });
        else
            stats.push_back(lookup_statistic(name));
    }

    ConversionReport report;
    for (std::size_t i = 0; i < names.size(); ++i) {
        ReportRow row;
        row.statistic = names[i];
        row.before.value = stats[i](rho_in);
        row.after.value = stats[i](rho_out);
        report.rows.push_back(std::move(row));
    }

    const bool with_mc = options.mc_trials > 0 && !options.records_before.empty() &&
                         !options.records_after.empty();
    if (with_mc) {
        MonteCarloOptions mc;
        mc.n_trials = options.mc_trials;
        mc.mle = options.mle;
        mc.threads = options.threads;
        mc.seed = derive_seed(options.seed, 0xbef0ULL);
        const auto before =
            monte_carlo_uncertainty(options.records_before, stats, rho_in.n_qubits, mc);
        mc.seed = derive_seed(options.seed, 0xafceULL);
        const auto after =
            monte_carlo_uncertainty(options.records_after, stats, rho_out.n_qubits, mc);
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            report.rows[i].before.std_dev = before[i].std_dev;
            report.rows[i].after.std_dev = after[i].std_dev;
        }
    }
    return report;
}

}  // namespace ghzw
