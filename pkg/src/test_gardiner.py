import math

import numpy as np
import numpy.testing as npt
import pytest

import fock_core
from fock_core import basis_state, build_sector
from gardiner import *

ACCEPTANCE_N = [1, 2, 5, 10, 50, 200]


def test_q_numbers():
    assert q_number(3, 0.1) == pytest.approx(2.4)
    assert q_number(7, 0.0) == 7
    assert q_number(0, 0.3) == 0
    assert q_number(1, 0.3) == 1
    assert q_factorial(0, 0.1) == 1
    assert q_factorial(3, 0.1) == pytest.approx(1 * 1.8 * 2.4)
    assert float(QNumber(3, 0.1)) == pytest.approx(2.4)


def test_q_number_is_exact_on_sector():
    """
    <n> = n - n(n - 1)/N equals n(N - n + 1)/N and stays non-negative on 0..N.
    """
    for n_total in [3, 10, 64]:
        eta = 1.0 / n_total
        for n in range(n_total + 1):
            value = q_number(n, eta)
            assert value == pytest.approx(n * (n_total - n + 1) / n_total, abs=1e-12)
            assert value >= 0


def test_q_number_thermodynamic_limit():
    """
    At fixed n the q-number climbs monotonically to n as N grows.
    """
    for n in range(1, 6):
        values = [q_number(n, 1.0 / n_total) for n_total in (10, 100, 1000)]
        assert values[0] <= values[1] <= values[2] <= n
        assert n - values[2] == pytest.approx(n * (n - 1) / 1000, abs=1e-12)


def test_f_function_examples():
    for eta in [0.0, 0.1, 0.5, 2.0]:
        assert f_function(0, eta) == pytest.approx(1.0)
    for x in [0.0, 0.3, 4.0]:
        assert f_function(x, 0.0) == pytest.approx(1.0)
    assert f_function(1, 0.1) == pytest.approx(0.8)
    # same number as 1 - 2 eta N_e at N = 10, N_e = 1
    assert f_function(1, 0.1) == pytest.approx(1 - 2 * 0.1 * 1)


def test_f_function_domain():
    with pytest.raises(DomainError):
        f_function(10.0, 0.5)
    # double root: radicand zero up to roundoff
    assert f_function(1.0, 1.0) == pytest.approx(-1.0)


def test_make_algebra_small_cases():
    """
    N=1 gives 2x2 ladder matrices; N=2 has <(0,2)|b|(1,1)> = 1.
    """
    algebra = make_algebra(build_sector(1))
    npt.assert_allclose(algebra.b_lower.entries, [[0, 1], [0, 0]], atol=1e-15)
    npt.assert_allclose(algebra.b_raise.entries, [[0, 0], [1, 0]], atol=1e-15)
    npt.assert_allclose(
        fock_core.commutator(algebra.b_lower, algebra.b_raise).entries, np.diag([1, -1]), atol=1e-15
    )

    algebra = make_algebra(build_sector(2))
    assert algebra.b_lower.entries[0, 1] == pytest.approx(1.0)
    assert algebra.eta == 0.5 and algebra.q == 0.0

    for n_total in [1, 4, 9]:
        algebra = make_algebra(build_sector(n_total))
        vacuum = basis_state(algebra.sector, 0)
        npt.assert_allclose(fock_core.apply(algebra.h, vacuum).amplitudes, vacuum.amplitudes)


def test_make_algebra_rejects_bad_sectors():
    with pytest.raises(ValueError):
        make_algebra(build_sector(0))
    with pytest.raises(ValueError):
        make_algebra(build_sector(3, 3))


@pytest.mark.parametrize("n_total", ACCEPTANCE_N)
def test_verify_algebra_passes(n_total):
    """
    Every identity of the phonon algebra holds within its tolerance.
    """
    report = verify_algebra(make_algebra(build_sector(n_total), verify=False))
    failures = {k: r.residual for k, r in report.items() if not r.passed}
    assert not failures, f"N={n_total}: identities failed {failures}"
    assert report["exact_commutator"].residual <= 1e-12
    assert report["f_form"].residual <= 1e-10
    assert report["vacuum_annihilation"].residual == 0.0
    assert report["top_annihilation"].residual == 0.0


def test_q_commutator_deviation_values():
    """
    ([b, b^dagger]_q - I)|n> has norm 2 eta^2 n(n - 1); zero on |0> and |1>.
    """
    n_total = 10
    algebra = make_algebra(build_sector(n_total))
    eta = algebra.eta
    deviation = fock_core.q_commutator(algebra.b_lower, algebra.b_raise, algebra.q) - fock_core.identity(
        algebra.sector
    )
    for n in range(n_total + 1):
        norm = fock_core.apply(deviation, basis_state(algebra.sector, n)).norm()
        assert norm == pytest.approx(2 * eta**2 * n * (n - 1), abs=1e-12)

    algebra = make_algebra(build_sector(1))
    deviation = fock_core.q_commutator(algebra.b_lower, algebra.b_raise, algebra.q) - fock_core.identity(
        algebra.sector
    )
    assert deviation.max_abs() <= 1e-15


def test_principal_branch_only_covers_lower_half():
    """
    The principal root of f misses the commutator on the upper half of the ladder.
    """
    n_total = 10
    eta = 1.0 / n_total
    n = 9
    x = q_number(n, eta)
    assert f_function(x, eta) != pytest.approx(1 - 2 * n / n_total)
    assert f_function(x, eta, branch=-1) == pytest.approx(1 - 2 * n / n_total)


def test_q_fock_states_match_basis():
    """
    (b^dagger)^n|0>/sqrt(<n>!) is the basis state with n excited atoms.
    """
    for n_total in range(1, 101):
        algebra = make_algebra(build_sector(n_total), verify=False)
        for n in range(n_total + 1):
            state = q_fock_state(algebra, n)
            assert state.fidelity(basis_state(algebra.sector, n)) == pytest.approx(1.0, abs=1e-10)
            assert state.is_normalized()


def test_q_fock_state_examples():
    algebra = make_algebra(build_sector(2))
    npt.assert_allclose(q_fock_state(algebra, 2).amplitudes, [0, 0, 1], atol=1e-12)
    assert q_factorial(2, algebra.eta) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        q_fock_state(algebra, 3)


def test_ladder_elements_are_q_numbers():
    """
    <n+1|b^dagger|n>^2 = <n+1> for all n < N, N <= 100.
    """
    for n_total in range(1, 101):
        algebra = make_algebra(build_sector(n_total), verify=False)
        elements = np.diagonal(algebra.b_raise.entries, offset=-1)
        expected = [q_number(n + 1, algebra.eta) for n in range(n_total)]
        npt.assert_allclose(np.abs(elements) ** 2, expected, rtol=0, atol=1e-12)
        npt.assert_allclose(
            np.abs(elements) ** 2,
            [(n + 1) * (n_total - n) / n_total for n in range(n_total)],
            rtol=0,
            atol=1e-12,
        )


def test_report_to_dict_is_flat():
    report = report_to_dict(verify_algebra(make_algebra(build_sector(5))))
    for key, entry in report.items():
        assert set(entry) == {"residual", "tolerance", "passed"}, key
        assert entry["passed"] is True
        assert math.isfinite(entry["residual"])
