#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ghzw/random.hpp"
#include "ghzw/states.hpp"
#include "ghzw/unitaries.hpp"

using namespace ghzw;

namespace {

// Test-local Kronecker product, independent of the library's tensor().
Vec hand_kron(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
    return out;
}

Vec hand_product_ket(const std::vector<Ket2>& factors) {
    Vec v = Vec::Ones(1);
    for (const auto& f : factors) v = hand_kron(v, Vec(f));
    return v;
}

void expect_vec_near(const Vec& a, const Vec& b, double tol = 1e-12) {
    ASSERT_EQ(a.size(), b.size());
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(Basis, ConventionConstants) {
    EXPECT_NEAR(ket_h().norm(), 1.0, 1e-15);
    EXPECT_NEAR(ket_v().norm(), 1.0, 1e-15);
    EXPECT_NEAR(ket_d().norm(), 1.0, 1e-15);
    EXPECT_NEAR(ket_a().norm(), 1.0, 1e-15);
    EXPECT_NEAR(ket_r().norm(), 1.0, 1e-15);
    EXPECT_LT(std::abs(ket_d().dot(ket_a())), 1e-15);
    EXPECT_LT(std::abs(ket_h().dot(ket_v())), 1e-15);
    // |R> = (|H> - i|V>)/sqrt(2)
    EXPECT_NEAR(ket_r()(0).real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ket_r()(1).imag(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Basis, BigEndianIndexing) {
    EXPECT_EQ(index_label(3, 3), "HVV");
    EXPECT_EQ(index_label(5, 3), "VHV");
    EXPECT_EQ(index_label(6, 3), "VVH");
    EXPECT_EQ(index_label(0, 2, 'D', 'A'), "DD");
    EXPECT_EQ(bit_of_qubit(3, 0), 2);  // qubit 0 = most significant bit
}

TEST(MakeGhz, ThreeQubitPlus) {
    const PureState g = make_ghz(3, GhzSign::plus);
    const double r = 1.0 / std::sqrt(2.0);
    ASSERT_EQ(g.dim(), 8);
    EXPECT_NEAR(std::abs(g.amplitudes(0) - cx(r, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(g.amplitudes(7) - cx(r, 0)), 0.0, 1e-15);
    for (Eigen::Index i = 1; i < 7; ++i) EXPECT_EQ(g.amplitudes(i), cx(0, 0));
    EXPECT_TRUE(g.is_normalized());
}

TEST(MakeGhz, TwoQubitIsBellPhiPlus) {
    const PureState g = make_ghz(2, GhzSign::plus);
    const double r = 1.0 / std::sqrt(2.0);
    expect_vec_near(g.amplitudes, Vec{{cx(r, 0), cx(0, 0), cx(0, 0), cx(r, 0)}});
}

TEST(MakeGhz, MinusSign) {
    const PureState g = make_ghz(3, GhzSign::minus);
    EXPECT_NEAR(std::abs(g.amplitudes(7) - cx(-1.0 / std::sqrt(2.0), 0)), 0.0, 1e-15);
}

TEST(MakeGhz, RejectsSmallN) {
    EXPECT_THROW(make_ghz(1), std::invalid_argument);
    EXPECT_THROW(make_ghz(0), std::invalid_argument);
}

TEST(MakeWPrime, MatchesHandExpansion) {
    const PureState w = make_w_prime(3);
    EXPECT_TRUE(w.is_normalized());
    // (|DAA> + |ADA> + |AAD>)/sqrt(3), expanded by hand
    Vec expected = (hand_product_ket({ket_d(), ket_a(), ket_a()}) +
                    hand_product_ket({ket_a(), ket_d(), ket_a()}) +
                    hand_product_ket({ket_a(), ket_a(), ket_d()})) /
                   std::sqrt(3.0);
    expect_vec_near(w.amplitudes, expected);
}

TEST(MakeWPrime, OverlapWithGhzIsThreeQuarters) {
    EXPECT_NEAR(overlap_sq(make_ghz(3), make_w_prime(3)), 0.75, 1e-14);
}

TEST(MakeWPrime, TwoQubits) {
    Vec expected = (hand_product_ket({ket_d(), ket_a()}) +
                    hand_product_ket({ket_a(), ket_d()})) /
                   std::sqrt(2.0);
    expect_vec_near(make_w_prime(2).amplitudes, expected);
    EXPECT_THROW(make_w_prime(1), std::invalid_argument);
}

TEST(MakeWHv, SingleHStrings) {
    const PureState w = make_w_hv(3);
    const double r = 1.0 / std::sqrt(3.0);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double expected = (i == 3 || i == 5 || i == 6) ? r : 0.0;  // HVV, VHV, VVH
        EXPECT_NEAR(std::abs(w.amplitudes(i)), expected, 1e-15) << "index " << i;
    }
}

TEST(MakeWHv, HadamardRotationOfWPrime) {
    // D<->H, A<->V on every qubit maps W' onto W
    PureState rotated = make_w_prime(3);
    for (int q = 0; q < 3; ++q) rotated = apply_local(hadamard(), q, rotated);
    expect_vec_near(rotated.amplitudes, make_w_hv(3).amplitudes);
}

TEST(MakeWHv, TwoQubitsIsPsiPlus) {
    const double r = 1.0 / std::sqrt(2.0);
    expect_vec_near(make_w_hv(2).amplitudes, Vec{{cx(0, 0), cx(r, 0), cx(r, 0), cx(0, 0)}});
}

TEST(Tensor, BasicProducts) {
    const PureState h(1, Vec(ket_h()));
    const PureState v(1, Vec(ket_v()));
    expect_vec_near(tensor(h, v).amplitudes, Vec{{cx(0, 0), cx(1, 0), cx(0, 0), cx(0, 0)}});
    // a's qubits are the high bits
    expect_vec_near(tensor(v, h).amplitudes, Vec{{cx(0, 0), cx(0, 0), cx(1, 0), cx(0, 0)}});
}

TEST(Tensor, TwoBellPairs) {
    const PureState bell = make_ghz(2, GhzSign::plus);
    const PureState prod = tensor(bell, bell);
    ASSERT_EQ(prod.n_qubits, 4);
    // (|HHHH> + |HHVV> + |VVHH> + |VVVV>)/2
    for (Eigen::Index i = 0; i < 16; ++i) {
        const bool support = (i == 0 || i == 3 || i == 12 || i == 15);
        EXPECT_NEAR(std::abs(prod.amplitudes(i)), support ? 0.5 : 0.0, 1e-15);
    }
}

TEST(Tensor, DensityTraceMultiplicative) {
    const DensityMatrix a = DensityMatrix::from_pure(make_ghz(2));
    const DensityMatrix b = DensityMatrix::maximally_mixed(1);
    const DensityMatrix ab = tensor(a, b);
    EXPECT_EQ(ab.n_qubits, 3);
    EXPECT_NEAR(ab.trace(), 1.0, 1e-14);
    EXPECT_TRUE(ab.is_physical());
}

TEST(ApplyLocal, IdentityLeavesStateUnchanged) {
    const PureState w = make_w_prime(3);
    expect_vec_near(apply_local(identity2(), 1, w).amplitudes, w.amplitudes);
}

TEST(ApplyLocal, DaSwapOnAllQubitsMapsWPrimeToSingleAState) {
    // diag(1,-1) swaps D and A; single-D strings become single-A strings
    PureState s = make_w_prime(3);
    for (int q = 0; q < 3; ++q) s = apply_local(da_swap(), q, s);
    Vec expected = (hand_product_ket({ket_a(), ket_d(), ket_d()}) +
                    hand_product_ket({ket_d(), ket_a(), ket_d()}) +
                    hand_product_ket({ket_d(), ket_d(), ket_a()})) /
                   std::sqrt(3.0);
    EXPECT_NEAR(std::norm(Vec(expected).dot(s.amplitudes)), 1.0, 1e-12);
}

TEST(ApplyLocal, TargetsTheRightQubit) {
    // flip qubit 0 of |HVV>: X(x)I(x)I |011> = |111>
    PureState s = PureState::basis_state(3, 3);
    s = apply_local(pauli_x(), 0, s);
    EXPECT_NEAR(std::abs(s.amplitudes(7)), 1.0, 1e-15);
}

TEST(ApplyLocal, OutOfRangeThrows) {
    const PureState g = make_ghz(2);
    EXPECT_THROW(apply_local(identity2(), 2, g), std::invalid_argument);
    EXPECT_THROW(apply_local(identity2(), -1, g), std::invalid_argument);
}

TEST(ApplyLocal, DensityMatrixPathMatchesPurePath) {
    const PureState g = make_ghz(3);
    Rng rng(11);
    const LocalUnitary u = random_local_unitary(rng);
    const PureState gu = apply_local(u, 1, g);
    const DensityMatrix rho_u = apply_local(u, 1, DensityMatrix::from_pure(g));
    expect_vec_near(Vec(rho_u.matrix.reshaped()),
                    Vec(DensityMatrix::from_pure(gu).matrix.reshaped()));
}

TEST(Waveplates, HalfWaveAt22p5MapsHToD) {
    const PureState h(1, Vec(ket_h()));
    const PureState d(1, Vec(ket_d()));
    EXPECT_NEAR(overlap_sq(apply_local(half_wave_plate(M_PI / 8.0), 0, h), d), 1.0, 1e-14);
}

TEST(Waveplates, QuarterWaveAt45MapsHToR) {
    const PureState h(1, Vec(ket_h()));
    const PureState r(1, Vec(ket_r()));
    EXPECT_NEAR(overlap_sq(apply_local(quarter_wave_plate(M_PI / 4.0), 0, h), r), 1.0, 1e-14);
}

TEST(Waveplates, AreUnitary) {
    for (double theta : {0.0, 0.3, M_PI / 8.0, M_PI / 4.0, 1.2}) {
        EXPECT_TRUE(is_unitary(half_wave_plate(theta)));
        EXPECT_TRUE(is_unitary(quarter_wave_plate(theta)));
        EXPECT_TRUE(is_unitary(euler_zyz(theta, 0.7 * theta, -theta)));
    }
}

TEST(ExpandDaBasis, Ghz3HasFourEqualTerms) {
    const auto terms = expand_in_da_basis(make_ghz(3));
    ASSERT_EQ(terms.size(), 8u);
    for (const auto& t : terms) {
        const bool support = (t.labels == "DDD" || t.labels == "DAA" || t.labels == "ADA" ||
                              t.labels == "AAD");
        EXPECT_NEAR(std::abs(t.amplitude), support ? 0.5 : 0.0, 1e-14) << t.labels;
    }
}

TEST(ExpandDaBasis, Ghz4EvenAStrings) {
    // independent oracle: <s|GHZ> computed from hand-built product kets
    const PureState g = make_ghz(4);
    const auto terms = expand_in_da_basis(g);
    ASSERT_EQ(terms.size(), 16u);
    int supported = 0;
    for (const auto& t : terms) {
        std::vector<Ket2> factors;
        int n_a = 0;
        for (char c : t.labels) {
            factors.push_back(c == 'D' ? ket_d() : ket_a());
            n_a += (c == 'A');
        }
        const cx direct = hand_product_ket(factors).dot(g.amplitudes);
        EXPECT_NEAR(std::abs(t.amplitude - direct), 0.0, 1e-14) << t.labels;
        if (n_a % 2 == 0) {
            EXPECT_NEAR(std::abs(t.amplitude), 1.0 / std::sqrt(8.0), 1e-14) << t.labels;
            ++supported;
        } else {
            EXPECT_NEAR(std::abs(t.amplitude), 0.0, 1e-14) << t.labels;
        }
    }
    EXPECT_EQ(supported, 8);
}

TEST(ExpandDaBasis, SingleQubitD) {
    const auto terms = expand_in_da_basis(PureState(1, Vec(ket_d())));
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_EQ(terms[0].labels, "D");
    EXPECT_NEAR(std::abs(terms[0].amplitude), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(terms[1].amplitude), 0.0, 1e-15);
}

// GHZ factorization: |N+-> = (|{N-M}+>|M+-> + |{N-M}->|M-+>)/sqrt(2),
// extended down to the single-qubit cases |1+> = |D>, |1-> = |A>.
TEST(GhzStructure, FactorizationIdentity) {
    auto ghz_pm = [](int k, GhzSign sign) {
        if (k >= 2) return make_ghz(k, sign);
        return PureState(1, Vec(sign == GhzSign::plus ? ket_d() : ket_a()));
    };
    for (int n = 3; n <= 8; ++n) {
        for (int m = 2; m < n; ++m) {
            for (GhzSign sign : {GhzSign::plus, GhzSign::minus}) {
                const GhzSign flipped =
                    sign == GhzSign::plus ? GhzSign::minus : GhzSign::plus;
                Vec rhs = (tensor(ghz_pm(n - m, GhzSign::plus), make_ghz(m, sign)).amplitudes +
                           tensor(ghz_pm(n - m, GhzSign::minus), make_ghz(m, flipped)).amplitudes) /
                          std::sqrt(2.0);
                expect_vec_near(rhs, make_ghz(n, sign).amplitudes);
            }
        }
    }
}

// Even-A support rule by brute force for N <= 8.
TEST(GhzStructure, EvennessRule) {
    for (int n = 2; n <= 8; ++n) {
        const auto terms = expand_in_da_basis(make_ghz(n));
        const double amp = 1.0 / std::sqrt(std::pow(2.0, n - 1));
        for (const auto& t : terms) {
            const int n_a = static_cast<int>(std::count(t.labels.begin(), t.labels.end(), 'A'));
            EXPECT_NEAR(std::abs(t.amplitude), (n_a % 2 == 0) ? amp : 0.0, 1e-12)
                << "N=" << n << " " << t.labels;
        }
    }
}

// Odd N: |N+> = [sqrt(N) |W'_N> + sqrt(2^{N-1} - N) |phi>] / sqrt(2^{N-1})
// with |phi> the normalized projection onto odd-D-count >= 3 strings.
TEST(GhzStructure, OddNDecomposition) {
    for (int n : {3, 5, 7}) {
        const PureState ghz = make_ghz(n);
        const PureState w = make_w_prime(n);
        const double pow2 = std::pow(2.0, n - 1);
        const cx c = inner_product(w, ghz);
        EXPECT_NEAR(c.real(), std::sqrt(n / pow2), 1e-13);
        EXPECT_NEAR(c.imag(), 0.0, 1e-14);
        Vec phi = ghz.amplitudes - c * w.amplitudes;
        phi /= phi.norm();
        // phi lives on odd-D-count >= 3 strings
        const auto phi_terms = expand_in_da_basis(PureState(n, phi));
        for (const auto& t : phi_terms) {
            const int n_d = static_cast<int>(std::count(t.labels.begin(), t.labels.end(), 'D'));
            if (!(n_d % 2 == 1 && n_d >= 3))
                EXPECT_NEAR(std::abs(t.amplitude), 0.0, 1e-12) << "N=" << n << " " << t.labels;
        }
        const Vec recon =
            (std::sqrt(double(n)) * w.amplitudes + std::sqrt(pow2 - n) * phi) / std::sqrt(pow2);
        expect_vec_near(recon, ghz.amplitudes);
        EXPECT_NEAR(std::norm(Vec(recon).dot(ghz.amplitudes)), 1.0, 1e-12);
    }
}

TEST(Properties, UnitariesPreserveNorm) {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        Vec a(Eigen::Index(1) << n);
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a(i) = cx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        a /= a.norm();
        PureState psi(n, std::move(a));
        const int q = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
        psi = apply_local(random_local_unitary(rng), q, psi);
        EXPECT_NEAR(psi.norm_sq(), 1.0, 1e-12);
    }
}

TEST(Properties, DensityInvariantsAfterOperations) {
    EXPECT_TRUE(DensityMatrix::from_pure(make_w_prime(3)).is_physical());
    EXPECT_TRUE(DensityMatrix::maximally_mixed(3).is_physical());
    Rng rng(5);
    DensityMatrix rho = DensityMatrix::from_pure(make_ghz(3));
    rho = apply_local(random_local_unitary(rng), 2, rho);
    EXPECT_TRUE(rho.is_physical());
    EXPECT_TRUE(tensor(rho, DensityMatrix::maximally_mixed(1)).is_physical());
}

TEST(PureStateType, ValidationAndHelpers) {
    EXPECT_THROW(PureState(2, Vec::Ones(3)), std::invalid_argument);
    EXPECT_THROW(PureState::basis_state(2, 4), std::invalid_argument);
    EXPECT_THROW(DensityMatrix(2, Mat::Identity(3, 3)), std::invalid_argument);
    const PureState s(1, Vec(2 * ket_h()));
    EXPECT_FALSE(s.is_normalized());
    EXPECT_TRUE(s.normalized().is_normalized());
    EXPECT_THROW(PureState(1, Vec(0 * ket_h())).normalized(), std::invalid_argument);
}
