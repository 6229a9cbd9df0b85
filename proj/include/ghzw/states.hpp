// Multi-qubit pure states and density matrices over the H/V polarization
// basis, plus the canonical GHZ / W / W' constructors.
//
// Basis-index convention: big-endian, qubit 0 is the most significant bit
// of the computational index, H = 0 and V = 1. The index of |HVV> is
// therefore 0b011 = 3, matching left-to-right ket notation.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzw {

using cx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using Ket2 = Eigen::Vector2cd;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdFloor = -1e-10;

// --- single-qubit polarization kets ---
// Circular convention: |R> = (|H> - i|V>)/sqrt(2). Any consistent sign
// choice gives a tomographically complete set; this one is fixed so tests
// and serialized data stay stable.
inline Ket2 ket_h() { return Ket2(1.0, 0.0); }
inline Ket2 ket_v() { return Ket2(0.0, 1.0); }
inline Ket2 ket_d() { return Ket2(1.0, 1.0) / std::sqrt(2.0); }
inline Ket2 ket_a() { return Ket2(1.0, -1.0) / std::sqrt(2.0); }
inline Ket2 ket_r() { return Ket2(cx(1.0, 0.0), cx(0.0, -1.0)) / std::sqrt(2.0); }

inline Eigen::Index dim_for(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 24)
        throw std::invalid_argument("n_qubits must be in [1, 24]");
    return Eigen::Index(1) << n_qubits;
}

// Bit position of qubit q inside a computational index (MSB = qubit 0).
inline int bit_of_qubit(int n_qubits, int qubit) {
    if (qubit < 0 || qubit >= n_qubits)
        throw std::invalid_argument("qubit index out of range");
    return n_qubits - 1 - qubit;
}

// "HVV"-style label of a computational index under a two-letter alphabet.
inline std::string index_label(Eigen::Index index, int n_qubits,
                               char zero = 'H', char one = 'V') {
    std::string s(static_cast<std::size_t>(n_qubits), zero);
    for (int q = 0; q < n_qubits; ++q)
        if (index >> bit_of_qubit(n_qubits, q) & 1) s[static_cast<std::size_t>(q)] = one;
    return s;
}

struct PureState {
    int n_qubits = 0;
    Vec amplitudes;  // length 2^n_qubits

    PureState() = default;
    PureState(int n, Vec amps) : n_qubits(n), amplitudes(std::move(amps)) {
        if (amplitudes.size() != dim_for(n))
            throw std::invalid_argument("amplitude vector length must be 2^n_qubits");
    }

    static PureState basis_state(int n, Eigen::Index index) {
        Vec a = Vec::Zero(dim_for(n));
        if (index < 0 || index >= a.size())
            throw std::invalid_argument("basis index out of range");
        a(index) = 1.0;
        return PureState(n, std::move(a));
    }

    Eigen::Index dim() const { return amplitudes.size(); }
    double norm_sq() const { return amplitudes.squaredNorm(); }
    bool is_normalized(double tol = kNormTol) const {
        return std::abs(norm_sq() - 1.0) <= tol;
    }

    PureState normalized() const {
        double n2 = norm_sq();
        if (n2 < 1e-300) throw std::invalid_argument("cannot normalize zero state");
        PureState out = *this;
        out.amplitudes /= std::sqrt(n2);
        return out;
    }
};

inline cx inner_product(const PureState& a, const PureState& b) {
    if (a.n_qubits != b.n_qubits)
        throw std::invalid_argument("inner_product: qubit count mismatch");
    return a.amplitudes.dot(b.amplitudes);  // Eigen dot conjugates the left side
}

// |<a|b>|^2; the phase-free comparison used throughout.
inline double overlap_sq(const PureState& a, const PureState& b) {
    return std::norm(inner_product(a, b));
}

struct DensityMatrix {
    int n_qubits = 0;
    Mat matrix;  // 2^n x 2^n

    DensityMatrix() = default;
    DensityMatrix(int n, Mat m) : n_qubits(n), matrix(std::move(m)) {
        const Eigen::Index d = dim_for(n);
        if (matrix.rows() != d || matrix.cols() != d)
            throw std::invalid_argument("density matrix must be 2^n x 2^n");
    }

    static DensityMatrix from_pure(const PureState& psi) {
        return DensityMatrix(psi.n_qubits, psi.amplitudes * psi.amplitudes.adjoint());
    }

    static DensityMatrix maximally_mixed(int n) {
        const Eigen::Index d = dim_for(n);
        return DensityMatrix(n, Mat::Identity(d, d) / static_cast<double>(d));
    }

    Eigen::Index dim() const { return matrix.rows(); }
    double trace() const { return matrix.trace().real(); }

    // Hermitian / trace-1 / PSD up to the numerical floors.
    bool is_physical(double herm_tol = kHermTol, double eig_floor = kPsdFloor) const {
        if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
        if (std::abs(matrix.trace() - cx(1.0, 0.0)) > herm_tol) return false;
        Eigen::SelfAdjointEigenSolver<Mat> es(matrix, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= eig_floor;
    }
};

enum class GhzSign { plus, minus };

// (|H>^n +/- |V>^n)/sqrt(2), constructor phase pinned real-positive on HHH...H.
inline PureState make_ghz(int n, GhzSign sign = GhzSign::plus) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    Vec a = Vec::Zero(dim_for(n));
    const double r = 1.0 / std::sqrt(2.0);
    a(0) = r;
    a(a.size() - 1) = (sign == GhzSign::plus) ? r : -r;
    return PureState(n, std::move(a));
}

// Equal superposition of the n strings with a single |D> and n-1 |A>s,
// expanded in the H/V computational basis.
inline PureState make_w_prime(int n) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    Vec a = Vec::Zero(dim_for(n));
    const Ket2 d = ket_d(), ad = ket_a();
    for (int q = 0; q < n; ++q) {
        // accumulate the product ket with |D> on qubit q
        Vec term = Vec::Ones(1);
        for (int p = 0; p < n; ++p) {
            const Ket2& f = (p == q) ? d : ad;
            Vec next(term.size() * 2);
            for (Eigen::Index i = 0; i < term.size(); ++i) {
                next(2 * i) = term(i) * f(0);
                next(2 * i + 1) = term(i) * f(1);
            }
            term.swap(next);
        }
        a += term;
    }
    a /= std::sqrt(static_cast<double>(n));
    return PureState(n, std::move(a));
}

// Equal superposition of the n single-H strings, e.g. (|HVV>+|VHV>+|VVH>)/sqrt(3).
inline PureState make_w_hv(int n) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    Vec a = Vec::Zero(dim_for(n));
    const double r = 1.0 / std::sqrt(static_cast<double>(n));
    const Eigen::Index all_v = (Eigen::Index(1) << n) - 1;
    for (int q = 0; q < n; ++q)
        a(all_v ^ (Eigen::Index(1) << bit_of_qubit(n, q))) = r;
    return PureState(n, std::move(a));
}

// Kronecker products; a's qubits become the high bits.
inline PureState tensor(const PureState& a, const PureState& b) {
    PureState out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.amplitudes = Vec(a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        out.amplitudes.segment(i * b.dim(), b.dim()) = a.amplitudes(i) * b.amplitudes;
    return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    DensityMatrix out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    const Eigen::Index da = a.dim(), db = b.dim();
    out.matrix = Mat(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            out.matrix.block(i * db, j * db, db, db) = a.matrix(i, j) * b.matrix;
    return out;
}

// Applies I (x) ... (x) op (x) ... (x) I on the target qubit. Does not
// renormalize; callers that apply non-unitary ops own the norm bookkeeping.
inline PureState apply_local(const Eigen::Matrix2cd& op, int target_qubit,
                             const PureState& state) {
    const int bit = bit_of_qubit(state.n_qubits, target_qubit);
    const Eigen::Index step = Eigen::Index(1) << bit;
    const Eigen::Index block = step << 1;
    PureState out = state;
    Vec& a = out.amplitudes;
    for (Eigen::Index base = 0; base < a.size(); base += block) {
        for (Eigen::Index off = 0; off < step; ++off) {
            const Eigen::Index i0 = base + off;
            const Eigen::Index i1 = i0 + step;
            const cx x = a(i0), y = a(i1);
            a(i0) = op(0, 0) * x + op(0, 1) * y;
            a(i1) = op(1, 0) * x + op(1, 1) * y;
        }
    }
    return out;
}

// M rho M^dagger on the target qubit, again without renormalization.
inline DensityMatrix apply_local(const Eigen::Matrix2cd& op, int target_qubit,
                                 const DensityMatrix& rho) {
    const int bit = bit_of_qubit(rho.n_qubits, target_qubit);
    const Eigen::Index step = Eigen::Index(1) << bit;
    const Eigen::Index block = step << 1;
    const Eigen::Index d = rho.dim();
    Mat m = rho.matrix;
    // left multiply on rows
    for (Eigen::Index base = 0; base < d; base += block)
        for (Eigen::Index off = 0; off < step; ++off) {
            const Eigen::Index i0 = base + off, i1 = i0 + step;
            const Eigen::RowVectorXcd r0 = m.row(i0), r1 = m.row(i1);
            m.row(i0) = op(0, 0) * r0 + op(0, 1) * r1;
            m.row(i1) = op(1, 0) * r0 + op(1, 1) * r1;
        }
    // right multiply by op^dagger on columns
    for (Eigen::Index base = 0; base < d; base += block)
        for (Eigen::Index off = 0; off < step; ++off) {
            const Eigen::Index j0 = base + off, j1 = j0 + step;
            const Vec c0 = m.col(j0), c1 = m.col(j1);
            m.col(j0) = std::conj(op(0, 0)) * c0 + std::conj(op(0, 1)) * c1;
            m.col(j1) = std::conj(op(1, 0)) * c0 + std::conj(op(1, 1)) * c1;
        }
    return DensityMatrix(rho.n_qubits, std::move(m));
}

struct DaAmplitude {
    std::string labels;  // string over {D, A}, qubit 0 first
    cx amplitude;
};

// Amplitudes of the state in the product D/A basis, index order D=0, A=1.
// The per-qubit change of basis is the Hadamard (real, self-inverse).
inline std::vector<DaAmplitude> expand_in_da_basis(const PureState& state) {
    static const Eigen::Matrix2cd had = [] {
        Eigen::Matrix2cd h;
        h << 1.0, 1.0, 1.0, -1.0;
        return Eigen::Matrix2cd(h / std::sqrt(2.0));
    }();
    PureState rotated = state;
    for (int q = 0; q < state.n_qubits; ++q) rotated = apply_local(had, q, rotated);
    std::vector<DaAmplitude> out;
    out.reserve(static_cast<std::size_t>(rotated.dim()));
    for (Eigen::Index i = 0; i < rotated.dim(); ++i)
        out.push_back({index_label(i, state.n_qubits, 'D', 'A'), rotated.amplitudes(i)});
    return out;
}

}  // namespace ghzw
