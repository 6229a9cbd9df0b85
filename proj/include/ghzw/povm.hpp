// Local POVM filtering that converts GHZ states into approximate W' states.
//
// The POVM on each qubit has elements eps1 = |A><A| + a^2 |D><D| and
// eps2 = (1 - a^2)|D><D| (analysis basis), or the H/V-oriented variant
// eps1 = |V><V| + a^2 |H><H| matching a partial polarizer that attenuates
// the horizontal component. Post-selecting on every qubit reporting eps1
// suppresses k-D amplitudes by a^k, trading success probability for
// fidelity with the W' state.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ghzw/random.hpp"
#include "ghzw/states.hpp"
#include "ghzw/unitaries.hpp"

namespace ghzw {

// Filter strength. Stored as a^2 because that is the measured quantity
// (the transmission ratio of the attenuated component); a in (0, 1].
class FilterStrength {
public:
    static FilterStrength from_a(double a) {
        check(a * a);
        return FilterStrength(a * a);
    }
    static FilterStrength from_a_squared(double a2) {
        check(a2);
        return FilterStrength(a2);
    }

    double a() const { return std::sqrt(a2_); }
    double a_squared() const { return a2_; }

private:
    explicit FilterStrength(double a2) : a2_(a2) {}
    static void check(double a2) {
        if (!(a2 > 0.0) || a2 > 1.0 + 1e-15)
            throw std::invalid_argument("filter strength must satisfy 0 < a <= 1");
    }
    double a2_;
};

enum class FilterBasis { da, hv };
enum class PovmOutcome { keep, reject };  // eps1 / eps2

namespace detail {
inline Eigen::Matrix2cd proj(const Ket2& k) { return k * k.adjoint(); }
}  // namespace detail

// Kraus operator for the keep branch: M1 = a|D><D| + |A><A| (da) or
// a|H><H| + |V><V| (hv); M1^dagger M1 = eps1.
struct KrausFilter {
    FilterStrength strength;
    FilterBasis basis;
    Eigen::Matrix2cd matrix;

    static KrausFilter keep(FilterStrength s, FilterBasis b) {
        const double a = s.a();
        Eigen::Matrix2cd m = (b == FilterBasis::da)
                                 ? a * detail::proj(ket_d()) + detail::proj(ket_a())
                                 : a * detail::proj(ket_h()) + detail::proj(ket_v());
        return KrausFilter{s, b, std::move(m)};
    }

    // sqrt(eps2) = sqrt(1-a^2)|D><D|; exposed for completeness checks and
    // outcome sampling, not part of the post-selected path.
    static KrausFilter reject(FilterStrength s, FilterBasis b) {
        const double r = std::sqrt(std::max(0.0, 1.0 - s.a_squared()));
        Eigen::Matrix2cd m = (b == FilterBasis::da) ? r * detail::proj(ket_d())
                                                    : r * detail::proj(ket_h());
        return KrausFilter{s, b, std::move(m)};
    }

    Eigen::Matrix2cd povm_element() const { return matrix.adjoint() * matrix; }
};

inline Eigen::Matrix2cd povm_element_keep(FilterStrength s, FilterBasis b) {
    return KrausFilter::keep(s, b).povm_element();
}

inline Eigen::Matrix2cd povm_element_reject(FilterStrength s, FilterBasis b) {
    return KrausFilter::reject(s, b).povm_element();
}

template <class State>
struct FilterOutcome {
    State output_state;  // renormalized
    double success_probability = 0.0;
    std::vector<PovmOutcome> per_qubit_outcome;
    double a_squared = 0.0;
};

// Applies the keep-branch Kraus operator to every qubit and post-selects.
// success_probability is the pre-normalization squared norm.
inline FilterOutcome<PureState> apply_filter_all(const PureState& state,
                                                 FilterStrength strength,
                                                 FilterBasis basis = FilterBasis::da) {
    const Eigen::Matrix2cd m1 = KrausFilter::keep(strength, basis).matrix;
    PureState filtered = state;
    for (int q = 0; q < state.n_qubits; ++q) filtered = apply_local(m1, q, filtered);
    const double p = filtered.norm_sq();
    if (p < 1e-15)
        throw std::invalid_argument("apply_filter_all: degenerate input, post-filter norm ~ 0");
    filtered.amplitudes /= std::sqrt(p);
    return {std::move(filtered), p,
            std::vector<PovmOutcome>(static_cast<std::size_t>(state.n_qubits), PovmOutcome::keep),
            strength.a_squared()};
}

inline FilterOutcome<DensityMatrix> apply_filter_all(const DensityMatrix& rho,
                                                     FilterStrength strength,
                                                     FilterBasis basis = FilterBasis::da) {
    const Eigen::Matrix2cd m1 = KrausFilter::keep(strength, basis).matrix;
    DensityMatrix filtered = rho;
    for (int q = 0; q < rho.n_qubits; ++q) filtered = apply_local(m1, q, filtered);
    const double p = filtered.trace();
    if (p < 1e-15)
        throw std::invalid_argument("apply_filter_all: degenerate input, post-filter trace ~ 0");
    filtered.matrix /= p;
    return {std::move(filtered), p,
            std::vector<PovmOutcome>(static_cast<std::size_t>(rho.n_qubits), PovmOutcome::keep),
            strength.a_squared()};
}

// Simulates one experimental run: samples the POVM outcome qubit by qubit
// with Born probabilities. success_probability is the joint probability of
// the sampled outcome string. Deterministic given the Rng state.
inline FilterOutcome<PureState> sample_filter_outcomes(const PureState& state,
                                                       FilterStrength strength,
                                                       FilterBasis basis, Rng& rng) {
    const Eigen::Matrix2cd keep = KrausFilter::keep(strength, basis).matrix;
    const Eigen::Matrix2cd reject = KrausFilter::reject(strength, basis).matrix;
    PureState cur = state.normalized();
    std::vector<PovmOutcome> outcomes;
    double joint = 1.0;
    for (int q = 0; q < state.n_qubits; ++q) {
        PureState kept = apply_local(keep, q, cur);
        const double p_keep = std::min(1.0, kept.norm_sq() / cur.norm_sq());
        if (rng.uniform() < p_keep) {
            outcomes.push_back(PovmOutcome::keep);
            joint *= p_keep;
            cur = std::move(kept);
        } else {
            outcomes.push_back(PovmOutcome::reject);
            joint *= 1.0 - p_keep;
            cur = apply_local(reject, q, cur);
        }
        if (cur.norm_sq() < 1e-30)
            throw std::invalid_argument("sample_filter_outcomes: degenerate branch");
    }
    return {cur.normalized(), joint, std::move(outcomes), strength.a_squared()};
}

// --- closed-form fidelities ---

// F_W' = 3/(a^4 + 3): fidelity of the post-selected 3-qubit state with W'.
inline double fidelity_w3_analytic(FilterStrength s) {
    const double a2 = s.a_squared();
    return 3.0 / (a2 * a2 + 3.0);
}

// F_GHZ = (a^4 + 6a^2 + 9)/(4a^4 + 12).
inline double fidelity_ghz3_analytic(FilterStrength s) {
    const double a2 = s.a_squared();
    const double a4 = a2 * a2;
    return (a4 + 6.0 * a2 + 9.0) / (4.0 * a4 + 12.0);
}

// F^N_W' = 2 a^2 N / ((1+a^2)^N - (1-a^2)^N), N even or odd.
inline double fidelity_wN_analytic(int n, FilterStrength s) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    const double a2 = s.a_squared();
    const double denom = std::pow(1.0 + a2, n) - std::pow(1.0 - a2, n);
    return 2.0 * a2 * n / denom;
}

// All-eps1 probability for the (relabeled) N-qubit GHZ input:
// [(1+a^2)^N - (1-a^2)^N] / 2^N; reduces to (a^6 + 3a^2)/4 at N = 3.
inline double success_probability_analytic(int n, FilterStrength s) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    const double a2 = s.a_squared();
    return (std::pow(1.0 + a2, n) - std::pow(1.0 - a2, n)) / std::pow(2.0, n);
}

// Full conversion procedure: build |N+>, relabel D<->A on qubit 0 when N is
// even (so the D/A expansion carries odd D-counts), filter every qubit.
inline FilterOutcome<PureState> convert_ghz_to_w(int n, FilterStrength strength) {
    PureState ghz = make_ghz(n, GhzSign::plus);
    if (n % 2 == 0) ghz = apply_local(da_swap(), 0, ghz);
    return apply_filter_all(ghz, strength, FilterBasis::da);
}

struct SuppressionRow {
    int d_count = 0;
    double pre_amplitude = 0.0;   // common |amplitude| of the k-D group before filtering
    double post_amplitude = 0.0;  // after filtering (unnormalized), = a^k * pre
};

// Groups the D/A amplitudes of the conversion input by D-count and reports
// the magnitude before and after the (unnormalized) filter pass.
inline std::vector<SuppressionRow> amplitude_suppression_report(int n,
                                                                FilterStrength strength) {
    PureState ghz = make_ghz(n, GhzSign::plus);
    if (n % 2 == 0) ghz = apply_local(da_swap(), 0, ghz);
    const Eigen::Matrix2cd m1 = KrausFilter::keep(strength, FilterBasis::da).matrix;
    PureState filtered = ghz;
    for (int q = 0; q < n; ++q) filtered = apply_local(m1, q, filtered);

    const auto pre = expand_in_da_basis(ghz);
    const auto post = expand_in_da_basis(filtered);
    std::vector<SuppressionRow> rows(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) rows[static_cast<std::size_t>(k)].d_count = k;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const auto& lab = pre[i].labels;
        const int k = static_cast<int>(std::count(lab.begin(), lab.end(), 'D'));
        auto& row = rows[static_cast<std::size_t>(k)];
        const double mag_pre = std::abs(pre[i].amplitude);
        const double mag_post = std::abs(post[i].amplitude);
        if (mag_pre < 1e-14) continue;  // string outside the GHZ support
        if (row.pre_amplitude == 0.0) {
            row.pre_amplitude = mag_pre;
            row.post_amplitude = mag_post;
        } else if (std::abs(row.pre_amplitude - mag_pre) > 1e-9) {
            throw std::logic_error("suppression report: uneven amplitudes within a D-count group");
        }
    }
    return rows;
}

}  // namespace ghzw
