import math

import numpy as np
import pytest

from qmoney.heckemoney import (
    QMBanknote,
    SingularReductionError,
    attack_reconstruct,
    build_reduction,
    compute_eigenbasis,
    direct_eigenvalue_state,
    eigenvalue_of,
    mint,
    reduction_indices,
    tensor_eigenvalue_state,
    verify,
)
from qmoney.quatalg import brandt_table, sigma_prime
from qmoney.statevec import inner_product, trace_distance_pure


def eigenbasis(p, primes=(2, 3, 5), seed=0):
    return compute_eigenbasis(brandt_table(p), primes, np.random.default_rng(seed))


def test_p11_eigenvalues_match_published_cusp_coefficients():
    basis = eigenbasis(11, primes=(2, 3))
    eis = basis.eisenstein_index
    cusp = basis.cusp_indices[0]
    assert abs(basis.eigentable[(eis, 2)] - 3.0) < 1e-9
    assert abs(basis.eigentable[(cusp, 2)] + 2.0) < 1e-9
    assert abs(basis.eigentable[(cusp, 3)] + 1.0) < 1e-9


def test_eigenvector_residuals_are_tiny():
    for p in (11, 23, 47):
        basis = eigenbasis(p)
        bt = basis.brandt
        for t in range(basis.h):
            phi = basis.vectors[t]
            for ell in basis.primes:
                a = basis.eigentable[(t, ell)]
                resid = np.linalg.norm(bt.matrix(ell).T.astype(float) @ phi - a * phi)
                assert resid <= 1e-9


def test_cusp_eigenvalues_obey_sqrt_bound():
    for p in (11, 23, 47):
        bt = brandt_table(p)
        primes = tuple(ell for ell in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29) if ell != p)
        basis = compute_eigenbasis(bt, primes, np.random.default_rng(1))
        for t in basis.cusp_indices:
            for ell in primes:
                assert abs(basis.eigentable[(t, ell)]) <= 2 * math.sqrt(ell) + 1e-9


def test_cusp_coordinate_sums_vanish_and_eisenstein_matches_weights():
    basis = eigenbasis(23)
    w = np.array(basis.weights, dtype=float)
    for t in basis.cusp_indices:
        petersson = basis.vectors[t] * (2.0 / w) * (w / 2.0)
        assert abs(petersson.sum()) < 1e-9  # plain coordinate sum is zero
    eis = basis.vectors[basis.eisenstein_index]
    expected = (2.0 / w) / np.linalg.norm(2.0 / w)
    assert np.allclose(np.abs(eis), expected, atol=1e-9)


def test_eigenvalue_multiplicativity():
    basis = eigenbasis(23)
    bt = basis.brandt
    for t in range(basis.h):
        a6 = eigenvalue_of(basis, t, 6)
        a2 = basis.eigentable[(t, 2)]
        a3 = basis.eigentable[(t, 3)]
        assert abs(a6 - a2 * a3) < 1e-9
        a4 = eigenvalue_of(basis, t, 4)
        assert abs(a4 - (a2 * a2 - 2)) < 1e-9
        # against the operator itself
        phi = basis.vectors[t]
        assert np.linalg.norm(bt.matrix(6).T.astype(float) @ phi - a6 * phi) < 1e-8


def test_eigenvalue_rejects_bad_indices():
    basis = eigenbasis(11, primes=(2, 3))
    with pytest.raises(ValueError):
        eigenvalue_of(basis, 0, 11)
    with pytest.raises(KeyError):
        eigenvalue_of(basis, 0, 7)


def test_mint_exact_serial_and_round_trip():
    basis = eigenbasis(23)
    rng = np.random.default_rng(5)
    note = mint(basis, [2, 3, 6], 0.0, rng)
    form = next(
        t
        for t in basis.cusp_indices
        if np.allclose(basis.vectors[t], note.money)
    )
    for n, b in zip(note.operators, note.serial):
        assert abs(b - eigenvalue_of(basis, form, n)) < 1e-12
    assert verify(basis, note, tol=1e-9)


def test_mint_with_noise_accepts_at_double_tolerance():
    basis = eigenbasis(23)
    rng = np.random.default_rng(6)
    eps = 1e-3
    for _ in range(20):
        note = mint(basis, [2, 3], eps, rng)
        assert verify(basis, note, tol=2 * eps)


def test_verify_rejects_other_eigenforms_when_gaps_are_wide():
    basis = eigenbasis(23)
    rng = np.random.default_rng(7)
    eps = 1e-4
    tol = 2 * eps
    gaps = []
    for t in basis.cusp_indices:
        for s in range(basis.h):
            if s == t:
                continue
            gaps.append(
                min(
                    abs(basis.eigentable[(t, ell)] - basis.eigentable[(s, ell)])
                    for ell in (2, 3)
                )
            )
    assert min(gaps) > 2 * (tol + eps)
    note = mint(basis, [2, 3], eps, rng)
    for s in range(basis.h):
        if np.allclose(basis.vectors[s], note.money):
            continue
        forged = QMBanknote(
            operators=note.operators, serial=note.serial, money=basis.vectors[s].copy()
        )
        assert not verify(basis, forged, tol=tol)


def test_verify_mixture_matches_petersson_rayleigh_prediction():
    basis = eigenbasis(23)
    t1, t2 = basis.cusp_indices[0], basis.cusp_indices[1]
    w = np.array(basis.weights, dtype=float)
    theta = 0.3
    mix = math.cos(theta) * basis.vectors[t1] + math.sin(theta) * basis.vectors[t2]
    mix /= np.linalg.norm(mix)
    c1 = float((mix * w / 2.0) @ basis.vectors[t1]) ** 2 / float(
        (basis.vectors[t1] * w / 2.0) @ basis.vectors[t1]
    )
    c2 = float((mix * w / 2.0) @ basis.vectors[t2]) ** 2 / float(
        (basis.vectors[t2] * w / 2.0) @ basis.vectors[t2]
    )
    for ell in (2, 3):
        a1 = basis.eigentable[(t1, ell)]
        a2 = basis.eigentable[(t2, ell)]
        predicted = (c1 * a1 + c2 * a2) / (c1 + c2)
        from qmoney.heckemoney import _petersson_rayleigh

        got = _petersson_rayleigh(basis, mix, ell)
        assert abs(got - predicted) < 1e-6


def test_reduction_indices_pin_msb_first_order():
    assert reduction_indices(3, (2, 3)) == (1, 3, 2)
    assert reduction_indices(4, (2, 3)) == (1, 3, 2, 6)
    assert reduction_indices(5, (2, 3, 5)) == (1, 5, 3, 15, 2)


def test_reduction_row_zero_is_the_petersson_identity_row():
    basis = eigenbasis(23)
    bt = basis.brandt
    for k in range(basis.h):
        rs = build_reduction(basis, bt, k)
        expected = np.zeros(basis.h)
        expected[k] = basis.weights[k] / 2.0
        assert np.allclose(rs.matrix[0], expected)


def test_reduction_composite_row_matches_operator_product():
    basis = eigenbasis(23)
    bt = basis.brandt
    rs = build_reduction(basis, bt, 0)
    w = np.array(basis.weights, dtype=float)
    b6 = (bt.matrix(2) @ bt.matrix(3)).astype(float)
    for j, n in enumerate(rs.indices):
        if n == 6:
            assert np.allclose(rs.matrix[j], b6[0] * w / 2.0)


def test_exact_reconstruction_for_every_cusp_form():
    for p in (23, 47):
        basis = eigenbasis(p)
        bt = basis.brandt
        rng = np.random.default_rng(11)
        for form in basis.cusp_indices:
            exact = {ell: basis.eigentable[(form, ell)] for ell in basis.primes}
            pivot = int(rng.integers(0, basis.h))
            while abs(basis.vectors[form][pivot]) < 1e-9:
                pivot = int(rng.integers(0, basis.h))
            rs = build_reduction(basis, bt, pivot)
            phi, diag = attack_reconstruct(rs, exact)
            assert abs(float(phi @ basis.vectors[form])) >= 1 - 1e-9
            assert diag["residual"] < 1e-9


def test_zero_pivot_coordinate_branch():
    # a pivot where the eigenform coordinate vanishes leaves the system unable
    # to see the form; construct or skip per availability at tested primes
    found = None
    for p in (23, 47):
        basis = eigenbasis(p)
        for form in basis.cusp_indices:
            for pivot in range(basis.h):
                if abs(basis.vectors[form][pivot]) < 1e-9:
                    found = (p, form, pivot)
    if found is None:
        pytest.skip("no vanishing eigenform coordinate at tested primes")


def test_eisenstein_reconstruction_from_sigma_values():
    basis = eigenbasis(23)
    bt = basis.brandt
    rs = build_reduction(basis, bt, 1)
    values = {ell: float(sigma_prime(ell, 23)) for ell in rs.primes}
    phi, _ = attack_reconstruct(rs, values)
    target = basis.vectors[basis.eisenstein_index]
    assert abs(float(phi @ target)) >= 1 - 1e-9


def test_noisy_reconstruction_tracks_condition_number():
    eps = 1e-3
    rng = np.random.default_rng(13)
    for p in (23, 47):
        basis = eigenbasis(p)
        bt = basis.brandt
        for form in basis.cusp_indices:
            exact = {ell: basis.eigentable[(form, ell)] for ell in basis.primes}
            noisy = {ell: v + rng.uniform(-eps, eps) for ell, v in exact.items()}
            pivot = max(
                range(basis.h), key=lambda k: abs(basis.vectors[form][k])
            )
            rs = build_reduction(basis, bt, pivot)
            phi, diag = attack_reconstruct(rs, noisy, reference_values=exact)
            fid = abs(float(phi @ basis.vectors[form]))
            if rs.condition * eps < 0.01:
                assert fid >= 1 - 10 * rs.condition * eps
            assert diag["subadditivity_slack"] >= -1e-9


def test_tensor_state_equals_direct_grid_state():
    basis = eigenbasis(23)
    bt = basis.brandt
    w = np.array(basis.weights, dtype=float)
    primes = (2, 3)
    for form in basis.cusp_indices:
        phi = basis.vectors[form]

        def rayleigh(n):
            bn = bt.matrix(n).astype(float)
            return float((phi * w / 2.0) @ (bn.T @ phi)) / float((phi * w / 2.0) @ phi)

        values_by_index = {}
        s = len(primes)
        for j in range(1 << s):
            n = 1
            for t in range(s):
                if (j >> (s - 1 - t)) & 1:
                    n *= primes[t]
            values_by_index[j] = rayleigh(n)
        direct = direct_eigenvalue_state(primes, values_by_index)
        product = tensor_eigenvalue_state(
            primes, {ell: rayleigh(ell) for ell in primes}
        )
        assert np.max(np.abs(direct.amplitudes - product.amplitudes)) < 1e-12


def test_noisy_tensor_state_subadditivity_chain():
    basis = eigenbasis(47)
    rng = np.random.default_rng(17)
    form = basis.cusp_indices[0]
    exact = {ell: basis.eigentable[(form, ell)] for ell in (2, 3, 5)}
    noisy = {ell: v + rng.uniform(-1e-3, 1e-3) for ell, v in exact.items()}
    product_exact = tensor_eigenvalue_state((2, 3, 5), exact)
    product_noisy = tensor_eigenvalue_state((2, 3, 5), noisy)
    total = trace_distance_pure(product_exact, product_noisy)
    per_factor = sum(
        trace_distance_pure(
            tensor_eigenvalue_state((ell,), {ell: exact[ell]}),
            tensor_eigenvalue_state((ell,), {ell: noisy[ell]}),
        )
        for ell in (2, 3, 5)
    )
    assert total <= per_factor + 1e-9


def test_singular_reduction_reported():
    basis = eigenbasis(23)
    bt = basis.brandt
    rs = build_reduction(basis, bt, 0)
    bad = rs.matrix.copy()
    bad[1] = bad[0]
    import dataclasses

    broken = dataclasses.replace(rs, matrix=bad, condition=float("inf"))
    with pytest.raises(SingularReductionError):
        attack_reconstruct(broken, {ell: 0.0 for ell in rs.primes})
