import math
from fractions import Fraction

import numpy as np
import pytest

from qmoney.fixtures import load_level11_cusp_coefficients
from qmoney.quatalg import (
    QuatLattice,
    algebra_setup,
    brandt_table,
    enumerate_classes,
    gram_det,
    ideal_conjugate,
    ideal_inverse,
    ideal_mul,
    is_equivalent,
    is_invertible,
    left_order,
    maximal_order,
    reduced_norm,
    right_order,
    short_vectors,
    sigma_prime,
    theta_coefficients,
    trd_gram,
    unit_count,
)


def random_element(alg, rng, span=4):
    return alg.quaternion(*(int(v) for v in rng.integers(-span, span + 1, size=4)))


def random_order_element(order, rng, span=3):
    basis = order.basis()
    q = basis[0].scale(int(rng.integers(-span, span + 1)))
    for b in basis[1:]:
        q = q + b.scale(int(rng.integers(-span, span + 1)))
    return q


def random_prime_norm_ideal(p, ell, rng):
    """Right ideal ell*O + alpha*O of reduced norm ell."""
    alg, order = algebra_setup(p)
    basis = order.basis()
    while True:
        alpha = random_order_element(order, rng, span=ell)
        if alpha.is_zero():
            continue
        if alpha.nrd() % ell != 0:
            continue
        gens = [b.scale(ell) for b in basis] + [alpha * b for b in basis]
        ideal = QuatLattice.from_generators(alg, gens)
        if reduced_norm(ideal) == ell:
            return ideal


def test_algebra_setup_requires_three_mod_four():
    with pytest.raises(ValueError):
        algebra_setup(13)
    with pytest.raises(ValueError):
        algebra_setup(15)


def test_quaternion_identities():
    alg, _ = algebra_setup(11)
    i = alg.quaternion(0, 1)
    j = alg.quaternion(0, 0, 1)
    k = alg.quaternion(0, 0, 0, 1)
    assert i * i == alg.quaternion(-1)
    assert j * j == alg.quaternion(-11)
    assert i * j == k
    assert j * i == alg.quaternion(0, 0, 0, -1)
    rng = np.random.default_rng(0)
    for _ in range(30):
        a = random_element(alg, rng)
        b = random_element(alg, rng)
        assert a.trd() == (a + a.conjugate()).t * Fraction(1)
        assert (a * a.conjugate()).coeffs() == (a.nrd(), 0, 0, 0)
        assert (a * b).nrd() == a.nrd() * b.nrd()
        assert (a * b).conjugate() == b.conjugate() * a.conjugate()


def test_maximal_order_is_integral_and_has_discriminant_p():
    for p in (11, 23):
        alg, order = algebra_setup(p)
        basis = order.basis()
        for a in basis:
            for b in basis:
                prod = a * b
                assert prod.trd().denominator == 1
                assert prod.nrd().denominator == 1
                assert order.contains(prod)
        assert order.contains(alg.one())
        assert gram_det(order) == p * p


def test_left_and_right_order_of_the_order_itself():
    _, order = algebra_setup(11)
    assert left_order(order) == order
    assert right_order(order) == order


def test_prime_norm_ideals_invert_against_their_left_order():
    rng = np.random.default_rng(1)
    _, order = algebra_setup(11)
    primes = [ell for ell in (2, 3, 5, 7, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47) ]
    count = 0
    while count < 100:
        ell = primes[count % len(primes)]
        ideal = random_prime_norm_ideal(11, ell, rng)
        assert right_order(ideal) == order
        assert is_invertible(ideal)
        assert gram_det(ideal) == 11 * 11 * reduced_norm(ideal) ** 4
        count += 1


def test_ideal_inverse_formula():
    rng = np.random.default_rng(2)
    ideal = random_prime_norm_ideal(11, 3, rng)
    inv = ideal_inverse(ideal)
    prod = ideal_mul(ideal, inv)
    assert prod == left_order(ideal)


def test_is_equivalent_reflexive_and_scale_invariant():
    rng = np.random.default_rng(3)
    alg, order = algebra_setup(11)
    ideal = random_prime_norm_ideal(11, 5, rng)
    assert is_equivalent(ideal, ideal)
    alpha = random_element(alg, rng)
    while alpha.is_zero():
        alpha = random_element(alg, rng)
    scaled = QuatLattice.from_generators(alg, [alpha * b for b in ideal.basis()])
    assert is_equivalent(ideal, scaled)
    assert is_equivalent(scaled, ideal)


def test_class_representatives_are_inequivalent():
    cs = enumerate_classes(11)
    assert not is_equivalent(cs.reps[0], cs.reps[1])


def test_class_set_p11():
    cs = enumerate_classes(11)
    assert cs.h == 2
    assert sorted(cs.weights) == [4, 6]
    assert sum(Fraction(1, w) for w in cs.weights) == Fraction(10, 24)
    assert cs.reps[0] == maximal_order(11)


def test_class_set_p23():
    cs = enumerate_classes(23)
    assert cs.h == 3
    assert sum(Fraction(1, w) for w in cs.weights) == Fraction(22, 24)


def test_mass_formula_across_primes():
    for p in (11, 23, 31, 47):
        cs = enumerate_classes(p)
        assert sum(Fraction(1, w) for w in cs.weights) == Fraction(p - 1, 24)
        for w in cs.weights:
            assert w in (2, 4, 6, 8, 12, 24)


def test_unit_count_of_maximal_order_p11():
    assert unit_count(maximal_order(11)) == 4


def test_generic_unit_count_is_two():
    cs = enumerate_classes(47)
    assert 2 in cs.weights


def test_brandt_b1_is_identity():
    for p in (11, 23):
        bt = brandt_table(p)
        assert np.array_equal(bt.matrix(1), np.eye(bt.class_set.h, dtype=np.int64))


def test_brandt_p11_b2_row_sums_and_eigenvalues():
    bt = brandt_table(11)
    b2 = bt.matrix(2)
    assert (b2.sum(axis=1) == 3).all()
    eigs = sorted(np.linalg.eigvals(b2.astype(float)).real)
    assert abs(eigs[0] + 2) < 1e-9  # matches the published cusp coefficient a_2
    assert abs(eigs[1] - 3) < 1e-9
    assert load_level11_cusp_coefficients()[2] == -2


def test_brandt_hecke_recursion_and_multiplicativity():
    bt = brandt_table(11)
    b1, b2, b3, b4, b6 = (bt.matrix(n) for n in (1, 2, 3, 4, 6))
    assert np.array_equal(b4, b2 @ b2 - 2 * b1)
    assert np.array_equal(b6, b2 @ b3)
    assert np.array_equal(b2 @ b3, b3 @ b2)


def test_brandt_commutation_p23():
    bt = brandt_table(23)
    b2, b3, b5 = bt.matrix(2), bt.matrix(3), bt.matrix(5)
    assert np.array_equal(b2 @ b3, b3 @ b2)
    assert np.array_equal(b2 @ b5, b5 @ b2)
    assert np.array_equal(bt.matrix(6), b2 @ b3)
    assert np.array_equal(bt.matrix(15), b3 @ b5)


def test_brandt_row_sums_match_sigma_prime():
    for p in (11, 23):
        bt = brandt_table(p)
        for n in range(1, 13):
            if math.gcd(n, p) != 1:
                continue
            assert (bt.matrix(n).sum(axis=1) == sigma_prime(n, p)).all()


def test_brandt_weighted_symmetry():
    for p in (11, 23, 47):
        bt = brandt_table(p)
        w = bt.weights
        for n in (2, 3, 5):
            mat = bt.matrix(n)
            for i in range(len(w)):
                for j in range(len(w)):
                    assert mat[i, j] * w[j] == mat[j, i] * w[i]


def test_brandt_convention_resolution_is_reported():
    bt = brandt_table(11)
    assert bt.convention == "column-weight"


def test_brandt_rejects_indices_sharing_factors_with_p():
    bt = brandt_table(11)
    with pytest.raises(ValueError):
        bt.matrix(11)
    with pytest.raises(ValueError):
        bt.matrix(22)


def test_theta_r0_is_one():
    cs = enumerate_classes(11)
    for i in range(cs.h):
        for j in range(cs.h):
            assert theta_coefficients(cs, i, j, 3)[0] == 1


def test_theta_matches_weighted_brandt_entries():
    for p in (11, 23):
        cs = enumerate_classes(p)
        bt = brandt_table(p)
        for i in range(cs.h):
            for j in range(cs.h):
                th = theta_coefficients(cs, i, j, 20)
                for n in range(1, 21):
                    if math.gcd(n, p) != 1:
                        continue
                    assert th[n] == int(bt.matrix(n)[i, j]) * cs.weights[j]


def test_theta_row_sums_reproduce_eisenstein_series():
    # sum_j r_ij(n) / w_j = 2 sigma'(n) via the Eisenstein pairing
    p = 11
    cs = enumerate_classes(p)
    for i in range(cs.h):
        for n in range(1, 11):
            if math.gcd(n, p) != 1:
                continue
            total = sum(
                Fraction(theta_coefficients(cs, i, j, n)[n], cs.weights[j])
                for j in range(cs.h)
            )
            assert total == sigma_prime(n, p)


def test_brandt_trace_matches_published_cusp_coefficients():
    coeffs = load_level11_cusp_coefficients()
    a = {1: 1}
    a[2], a[3], a[5], a[7] = coeffs[2], coeffs[3], coeffs[5], coeffs[7]
    a[4] = a[2] * a[2] - 2
    a[6] = a[2] * a[3]
    a[8] = a[4] * a[2] - 2 * a[2]
    a[9] = a[3] * a[3] - 3
    a[10] = a[2] * a[5]
    bt = brandt_table(11)
    for n in range(1, 11):
        assert int(np.trace(bt.matrix(n))) == sigma_prime(n, 11) + a[n]


def test_short_vectors_counts_match_naive_box():
    # cross-check the enumerator against a plain box scan on a small form
    gram = [
        [Fraction(2), Fraction(1), Fraction(0), Fraction(0)],
        [Fraction(1), Fraction(2), Fraction(0), Fraction(0)],
        [Fraction(0), Fraction(0), Fraction(3), Fraction(1)],
        [Fraction(0), Fraction(0), Fraction(1), Fraction(4)],
    ]
    bound = Fraction(9)
    seen = {}
    for coords, value in short_vectors(gram, bound):
        seen[coords] = value
    count = 0
    for x0 in range(-4, 5):
        for x1 in range(-4, 5):
            for x2 in range(-3, 4):
                for x3 in range(-3, 4):
                    if not any((x0, x1, x2, x3)):
                        continue
                    v = (
                        2 * x0 * x0 + 2 * x0 * x1 + 2 * x1 * x1
                        + 3 * x2 * x2 + 2 * x2 * x3 + 4 * x3 * x3
                    )
                    if v <= 9:
                        count += 1
    assert count == 2 * len(seen)


def test_lattice_equality_is_basis_independent():
    alg, order = algebra_setup(11)
    basis = order.basis()
    shuffled = [basis[2], basis[0] + basis[1], basis[1], basis[3] + basis[0]]
    rebuilt = QuatLattice.from_generators(alg, shuffled)
    assert rebuilt == order
    assert hash(rebuilt) == hash(order)


def test_conjugate_involution():
    rng = np.random.default_rng(5)
    ideal = random_prime_norm_ideal(11, 7, rng)
    assert ideal_conjugate(ideal_conjugate(ideal)) == ideal


def test_trd_gram_determinant_identity():
    rng = np.random.default_rng(6)
    for ell in (2, 3, 5):
        ideal = random_prime_norm_ideal(23, ell, rng)
        assert gram_det(ideal) == 23 * 23 * reduced_norm(ideal) ** 4
        gram = trd_gram(ideal)
        for r in range(4):
            for c in range(4):
                assert gram[r][c] == gram[c][r]
