// Named single-qubit unitaries: Pauli/Hadamard, ZYZ Euler rotations and
// the waveplate Jones matrices used as apparatus models.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "ghzw/random.hpp"
#include "ghzw/states.hpp"

namespace ghzw {

using LocalUnitary = Eigen::Matrix2cd;

inline LocalUnitary identity2() { return LocalUnitary::Identity(); }

inline LocalUnitary pauli_x() {
    LocalUnitary m;
    m << 0, 1, 1, 0;
    return m;
}

inline LocalUnitary pauli_y() {
    LocalUnitary m;
    m << cx(0, 0), cx(0, -1), cx(0, 1), cx(0, 0);
    return m;
}

inline LocalUnitary pauli_z() {
    LocalUnitary m;
    m << 1, 0, 0, -1;
    return m;
}

inline LocalUnitary hadamard() {
    LocalUnitary m;
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

// diag(1,-1) in H/V coordinates swaps |D> and |A|; this is the relabeling
// applied to one qubit before filtering an even-N GHZ state.
inline LocalUnitary da_swap() { return pauli_z(); }

inline LocalUnitary rot_y(double theta) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    LocalUnitary m;
    m << c, -s, s, c;
    return m;
}

inline LocalUnitary rot_z(double theta) {
    LocalUnitary m;
    m << std::exp(cx(0, -theta / 2.0)), 0, 0, std::exp(cx(0, theta / 2.0));
    return m;
}

// U = Rz(alpha) Ry(beta) Rz(gamma), global phase dropped.
inline LocalUnitary euler_zyz(double alpha, double beta, double gamma) {
    return rot_z(alpha) * rot_y(beta) * rot_z(gamma);
}

// Half-wave plate, fast axis at angle theta from horizontal (phase-free form).
inline LocalUnitary half_wave_plate(double theta) {
    const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
    LocalUnitary m;
    m << c, s, s, -c;
    return m;
}

// Quarter-wave plate at angle theta, slow-axis phase i convention:
// R(theta) diag(1, i) R(-theta). With |R> = (|H> - i|V>)/sqrt(2) this sends
// |H> to |R> at theta = 45 degrees.
inline LocalUnitary quarter_wave_plate(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2cd rot;
    rot << c, -s, s, c;
    Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
    phase(0, 0) = 1.0;
    phase(1, 1) = cx(0, 1);
    return rot * phase * rot.transpose();
}

inline bool is_unitary(const LocalUnitary& u, double tol = 1e-12) {
    return (u * u.adjoint() - LocalUnitary::Identity()).cwiseAbs().maxCoeff() <= tol;
}

// Haar-distributed SU(2) element via ZYZ angles (beta ~ acos(1-2u)).
inline LocalUnitary random_local_unitary(Rng& rng) {
    const double alpha = rng.uniform(0.0, 2.0 * M_PI);
    const double gamma = rng.uniform(0.0, 2.0 * M_PI);
    const double beta = std::acos(1.0 - 2.0 * rng.uniform());
    return euler_zyz(alpha, beta, gamma);
}

}  // namespace ghzw
