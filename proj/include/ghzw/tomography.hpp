// Projective polarization tomography: the 4^N {H,V,D,R} setting grid,
// forward simulation with Poissonian counting noise, background and drift,
// and maximum-likelihood reconstruction of the density matrix.
//
// The likelihood is Poissonian per setting with a single global scale s,
// lambda_i = s <s_i|rho|s_i>; s is profiled out analytically each step, so
// only the drift-normalized relative count levels matter. rho is kept
// physical at every iterate through the parameterization rho = T^dag T / tr,
// T lower triangular.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzw/random.hpp"
#include "ghzw/states.hpp"

namespace ghzw {

enum class Projector : std::uint8_t { h = 0, v = 1, d = 2, r = 3 };

inline char projector_char(Projector p) { return "HVDR"[static_cast<int>(p)]; }

inline Projector projector_from_char(char c) {
    switch (c) {
        case 'H': case 'h': return Projector::h;
        case 'V': case 'v': return Projector::v;
        case 'D': case 'd': return Projector::d;
        case 'R': case 'r': return Projector::r;
        default: throw std::invalid_argument(std::string("unknown projector label: ") + c);
    }
}

inline Ket2 projector_ket(Projector p) {
    switch (p) {
        case Projector::h: return ket_h();
        case Projector::v: return ket_v();
        case Projector::d: return ket_d();
        default: return ket_r();
    }
}

// One projector label per qubit, e.g. (H, D, R) for a 3-photon setting.
using MeasurementSetting = std::vector<Projector>;

inline std::string setting_label(const MeasurementSetting& s) {
    std::string out;
    out.reserve(s.size());
    for (Projector p : s) out.push_back(projector_char(p));
    return out;
}

inline MeasurementSetting setting_from_label(const std::string& label) {
    MeasurementSetting s;
    s.reserve(label.size());
    for (char c : label) s.push_back(projector_from_char(c));
    return s;
}

// All 4^n settings in lexicographic (H, V, D, R) order, qubit 0 slowest:
// (H,..,H) first, (R,..,R) last.
inline std::vector<MeasurementSetting> enumerate_settings(int n) {
    if (n < 1) throw std::invalid_argument("enumerate_settings: n must be >= 1");
    std::vector<MeasurementSetting> out;
    const std::size_t total = std::size_t(1) << (2 * n);
    out.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        MeasurementSetting s(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q)
            s[static_cast<std::size_t>(q)] =
                static_cast<Projector>(code >> (2 * (n - 1 - q)) & 3);
        out.push_back(std::move(s));
    }
    return out;
}

// Product ket |s> for a setting.
inline Vec setting_ket(const MeasurementSetting& s) {
    Vec v = Vec::Ones(1);
    for (Projector p : s) {
        const Ket2 k = projector_ket(p);
        Vec next(v.size() * 2);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            next(2 * i) = v(i) * k(0);
            next(2 * i + 1) = v(i) * k(1);
        }
        v.swap(next);
    }
    return v;
}

// Born-rule probability <s|rho|s>, clamped to [0,1].
inline double projection_probability(const DensityMatrix& rho, const MeasurementSetting& s) {
    if (static_cast<int>(s.size()) != rho.n_qubits)
        throw std::invalid_argument("projection_probability: setting length != n_qubits");
    const Vec k = setting_ket(s);
    const double p = (k.adjoint() * rho.matrix * k)(0).real();
    if (p < -1e-10 - 1e-12 || p > 1.0 + 1e-10 + 1e-12)
        throw std::invalid_argument("projection_probability: rho is far from physical");
    return std::clamp(p, 0.0, 1.0);
}

struct CountRecord {
    MeasurementSetting setting;
    long long raw_counts = 0;       // observed coincidences
    double background = 0.0;        // estimated accidentals, subtracted on ingest
    double drift_normalizer = 1.0;  // e.g. squared trigger singles; divides counts
};

enum class NoiseModel { none, poisson };

struct SimulationOptions {
    double shots_per_setting = 1000.0;
    NoiseModel noise = NoiseModel::poisson;
    double background_rate = 0.0;               // expected accidentals per setting
    std::vector<double> background_per_setting; // optional per-setting override
    std::vector<double> drift;                  // optional per-setting multiplier
    std::uint64_t seed = 0;
};

// Expected counts are drift_i * (shots * p_i + background_i); with Poisson
// noise the raw counts are a Poisson draw around that, otherwise the
// rounded expectation. Records carry the background estimate and the drift
// normalizer so that ingest_counts can undo both.
inline std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                                const SimulationOptions& opts) {
    if (!(opts.shots_per_setting > 0.0))
        throw std::invalid_argument("simulate_counts: shots_per_setting must be > 0");
    const auto settings = enumerate_settings(rho.n_qubits);
    if (!opts.drift.empty() && opts.drift.size() != settings.size())
        throw std::invalid_argument("simulate_counts: drift length != number of settings");
    if (!opts.background_per_setting.empty() &&
        opts.background_per_setting.size() != settings.size())
        throw std::invalid_argument("simulate_counts: background length != number of settings");

    Rng rng(opts.seed);
    std::vector<CountRecord> records;
    records.reserve(settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        const double drift = opts.drift.empty() ? 1.0 : opts.drift[i];
        if (!(drift > 0.0))
            throw std::invalid_argument("simulate_counts: drift multipliers must be > 0");
        const double bg = opts.background_per_setting.empty() ? opts.background_rate
                                                              : opts.background_per_setting[i];
        const double p = projection_probability(rho, settings[i]);
        const double expected = drift * (opts.shots_per_setting * p + bg);
        long long raw = (opts.noise == NoiseModel::poisson)
                            ? rng.poisson(expected)
                            : std::llround(expected);
        records.push_back({settings[i], raw, drift * bg, drift});
    }
    return records;
}

struct CorrectedCounts {
    std::vector<MeasurementSetting> settings;
    Eigen::VectorXd corrected;    // max(0, raw - background) / drift
    Eigen::VectorXd frequencies;  // corrected / sum(corrected); the MLE scale is fitted
};

inline CorrectedCounts ingest_counts(const std::vector<CountRecord>& records) {
    if (records.empty()) throw std::invalid_argument("ingest_counts: no records");
    CorrectedCounts out;
    out.settings.reserve(records.size());
    out.corrected.resize(static_cast<Eigen::Index>(records.size()));
    std::vector<std::string> labels;
    labels.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.raw_counts < 0)
            throw std::invalid_argument("ingest_counts: negative raw counts");
        if (!(r.drift_normalizer > 0.0))
            throw std::invalid_argument("ingest_counts: drift_normalizer must be > 0");
        labels.push_back(setting_label(r.setting));
        out.settings.push_back(r.setting);
        out.corrected(static_cast<Eigen::Index>(i)) =
            std::max(0.0, static_cast<double>(r.raw_counts) - r.background) /
            r.drift_normalizer;
    }
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("ingest_counts: duplicate settings");
    const double total = out.corrected.sum();
    if (total <= 0.0)
        throw std::invalid_argument("ingest_counts: degenerate data, all corrected counts are zero");
    out.frequencies = out.corrected / total;
    return out;
}

enum class MleInitializer { linear_inversion, maximally_mixed };

struct MleOptions {
    int max_iterations = 5000;
    double tolerance = 1e-10;           // relative log-likelihood change
    double gradient_tolerance = 1e-8;   // on the count-normalized objective
    MleInitializer initializer = MleInitializer::linear_inversion;
    bool record_trace = false;          // keep per-iteration log-likelihoods
};

struct ReconstructionResult {
    DensityMatrix rho;
    double log_likelihood = 0.0;  // Poisson LL at the fitted scale (no ln c! term)
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // final scaled gradient norm
    std::vector<double> ll_trace;  // count-normalized profiled objective per accepted step
};

namespace detail {

// Hermitian operator basis coefficients <-> matrix, for linear inversion.
// Basis: E_kk; (E_kl + E_lk)/sqrt2; i(E_kl - E_lk)/sqrt2 for k < l.
inline Eigen::Index herm_param_count(Eigen::Index d) { return d * d; }

inline Mat herm_from_params(const Eigen::VectorXd& x, Eigen::Index d) {
    Mat m = Mat::Zero(d, d);
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < d; ++k) m(k, k) = x(idx++);
    const double r = 1.0 / std::sqrt(2.0);
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = k + 1; l < d; ++l) {
            const double re = x(idx++), im = x(idx++);
            m(k, l) += cx(re * r, -im * r);
            m(l, k) += cx(re * r, im * r);
        }
    return m;
}

// Lower-triangular T <-> real parameter vector (diagonal real, gauge-fixed).
inline Eigen::VectorXd params_from_tril(const Mat& t) {
    const Eigen::Index d = t.rows();
    Eigen::VectorXd x(d * d);
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
        x(idx++) = t(k, k).real();
        for (Eigen::Index l = 0; l < k; ++l) {
            x(idx++) = t(k, l).real();
            x(idx++) = t(k, l).imag();
        }
    }
    return x;
}

inline Mat tril_from_params(const Eigen::VectorXd& x, Eigen::Index d) {
    Mat t = Mat::Zero(d, d);
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
        t(k, k) = x(idx++);
        for (Eigen::Index l = 0; l < k; ++l) {
            const double re = x(idx++), im = x(idx++);
            t(k, l) = cx(re, im);
        }
    }
    return t;
}

// Lower-triangular T with T^dag T = rho (reverse Cholesky).
inline Mat tril_factor(const Mat& rho) {
    const Mat reversed = rho.reverse();
    Eigen::LLT<Mat> llt(reversed);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("tril_factor: Cholesky failed (matrix not PD)");
    const Mat lr = llt.matrixL();
    return Mat(lr.reverse()).adjoint();
}

// Eigenvalue clipping onto the physical cone, then trace renormalization,
// with a small admixture of the maximally mixed state so T stays PD.
inline Mat project_physical(const Mat& herm, double mix = 1e-6) {
    const Eigen::Index d = herm.rows();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (herm + herm.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (tr <= 1e-300) return Mat::Identity(d, d) / static_cast<double>(d);
    ev /= tr;
    Mat rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    return (1.0 - mix) * rho + mix * Mat::Identity(d, d) / static_cast<double>(d);
}

struct MleProblem {
    std::vector<Vec> kets;       // |s_i>
    Eigen::VectorXd counts;      // corrected counts c_i
    double total = 0.0;          // C = sum c_i
    Eigen::Index d = 0;

    Eigen::VectorXd probabilities(const Mat& rho) const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(kets.size()));
        for (std::size_t i = 0; i < kets.size(); ++i)
            p(static_cast<Eigen::Index>(i)) =
                std::max(0.0, (kets[i].adjoint() * rho * kets[i])(0).real());
        return p;
    }

    // Count-normalized profiled objective: sum f_i ln p_i - ln sum p_i.
    double objective(const Eigen::VectorXd& p) const {
        const double psum = p.sum();
        if (psum <= 0.0) return -1e300;
        double obj = -std::log(psum);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double f = counts(i) / total;
            if (f > 0.0) obj += f * std::log(std::max(p(i), 1e-300));
        }
        return obj;
    }

    // Gradient w.r.t. the T parameters at (T, G = T^dag T).
    Eigen::VectorXd gradient(const Mat& t, const Mat& g, const Eigen::VectorXd& p) const {
        const double tau = g.trace().real();
        const double psum = p.sum();
        Mat acc = Mat::Zero(d, d);
        double wp = 0.0;
        for (std::size_t i = 0; i < kets.size(); ++i) {
            const Eigen::Index ii = static_cast<Eigen::Index>(i);
            const double f = counts(ii) / total;
            const double w = (f > 0.0 ? f / std::max(p(ii), 1e-30) : 0.0) - 1.0 / psum;
            acc.noalias() += w * (kets[i] * kets[i].adjoint());
            wp += w * p(ii);
        }
        acc -= wp * Mat::Identity(d, d);
        const Mat ta = t * acc;
        Eigen::VectorXd grad(d * d);
        Eigen::Index idx = 0;
        for (Eigen::Index k = 0; k < d; ++k) {
            grad(idx++) = 2.0 * ta(k, k).real() / tau;
            for (Eigen::Index l = 0; l < k; ++l) {
                grad(idx++) = 2.0 * ta(k, l).real() / tau;
                grad(idx++) = 2.0 * ta(k, l).imag() / tau;
            }
        }
        return grad;
    }
};

}  // namespace detail

// Least-squares linear inversion of tr(X Pi_i) = c_i over Hermitian X,
// projected to the physical cone. The MLE initializer; also useful on its
// own as a fast non-iterative estimate.
inline DensityMatrix linear_inversion_estimate(const CorrectedCounts& data, int n) {
    const Eigen::Index d = dim_for(n);
    const Eigen::Index np = detail::herm_param_count(d);
    const Eigen::Index m = static_cast<Eigen::Index>(data.settings.size());
    Eigen::MatrixXd sensing(m, np);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vec k = setting_ket(data.settings[static_cast<std::size_t>(i)]);
        const Mat pi = k * k.adjoint();
        Eigen::Index idx = 0;
        for (Eigen::Index r = 0; r < d; ++r) sensing(i, idx++) = pi(r, r).real();
        const double rt2 = std::sqrt(2.0);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = r + 1; c < d; ++c) {
                sensing(i, idx++) = rt2 * pi(r, c).real();
                sensing(i, idx++) = rt2 * pi(r, c).imag();
            }
    }
    const Eigen::MatrixXd gram = sensing.transpose() * sensing;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        return DensityMatrix::maximally_mixed(n);
    const Eigen::VectorXd x = ldlt.solve(sensing.transpose() * data.corrected);
    return DensityMatrix(n, detail::project_physical(detail::herm_from_params(x, d)));
}

inline ReconstructionResult reconstruct_mle(const std::vector<CountRecord>& records, int n,
                                            const MleOptions& options = {}) {
    const auto all = enumerate_settings(n);
    if (records.size() < all.size())
        throw std::invalid_argument("reconstruct_mle: incomplete setting set");
    CorrectedCounts data = ingest_counts(records);
    {
        std::vector<std::string> have;
        have.reserve(records.size());
        for (const auto& r : records) have.push_back(setting_label(r.setting));
        std::sort(have.begin(), have.end());
        for (const auto& s : all)
            if (!std::binary_search(have.begin(), have.end(), setting_label(s)))
                throw std::invalid_argument("reconstruct_mle: incomplete setting set");
    }

    detail::MleProblem problem;
    problem.d = dim_for(n);
    problem.counts = data.corrected;
    problem.total = data.corrected.sum();
    problem.kets.reserve(data.settings.size());
    for (const auto& s : data.settings) problem.kets.push_back(setting_ket(s));

    DensityMatrix init = (options.initializer == MleInitializer::linear_inversion)
                             ? linear_inversion_estimate(data, n)
                             : DensityMatrix::maximally_mixed(n);
    Mat t = detail::tril_factor(init.matrix);
    t /= t.norm();  // scale gauge
    Eigen::VectorXd x = detail::params_from_tril(t);

    auto eval = [&](const Eigen::VectorXd& params, Mat& t_out, Mat& g_out,
                    Eigen::VectorXd& p_out) {
        t_out = detail::tril_from_params(params, problem.d);
        g_out = t_out.adjoint() * t_out;
        const double tau = g_out.trace().real();
        p_out = problem.probabilities(g_out / tau);
        return problem.objective(p_out);
    };

    Mat tm, gm;
    Eigen::VectorXd p;
    double obj = eval(x, tm, gm, p);

    ReconstructionResult result;
    if (options.record_trace) result.ll_trace.push_back(obj);

    double step = 1.0;
    double grad_norm = 0.0;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd grad = problem.gradient(tm, gm, p);
        grad_norm = grad.norm();
        if (grad_norm < options.gradient_tolerance) {
            converged = true;
            break;
        }
        // backtracking line search on the ascent direction
        double alpha = step;
        double next_obj = -1e300;
        Eigen::VectorXd x_next;
        Mat t_next, g_next;
        Eigen::VectorXd p_next;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            x_next = x + alpha * grad;
            next_obj = eval(x_next, t_next, g_next, p_next);
            if (next_obj >= obj + 1e-4 * alpha * grad_norm * grad_norm) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // no ascent step found at machine scale
        const double rel_change = (next_obj - obj) / (std::abs(obj) + 1.0);
        x = std::move(x_next);
        // re-fix the scale gauge to keep parameters bounded
        const double tn = t_next.norm();
        t_next /= tn;
        g_next /= tn * tn;
        x /= tn;
        tm = std::move(t_next);
        gm = std::move(g_next);
        p = std::move(p_next);  // probabilities of the normalized rho, scale-invariant
        obj = next_obj;
        step = std::min(alpha * 2.0, 1e6);
        if (options.record_trace) result.ll_trace.push_back(obj);
        if (rel_change < options.tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }

    const double tau = gm.trace().real();
    result.rho = DensityMatrix(n, gm / tau);
    result.iterations = iter;
    result.converged = converged;
    result.residual = grad_norm;
    // unscaled Poisson log-likelihood at the profiled scale s* = C / sum p
    const double psum = p.sum();
    double ll = problem.total * std::log(problem.total / psum) - problem.total;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (problem.counts(i) > 0.0)
            ll += problem.counts(i) * std::log(std::max(p(i), 1e-300));
    result.log_likelihood = ll;
    return result;
}

}  // namespace ghzw
