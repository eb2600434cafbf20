import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprbkit.quantum import (
    PAULI_X,
    PAULI_Z,
    DensityOperator,
    DimensionError,
    Observable,
    PureState,
    bell_state,
    canonical_angle,
    correlation,
    dephase,
    expectation,
    joint_probabilities,
    matrix_from_text,
    matrix_to_text,
    maximally_mixed,
    measure_collapse,
    partial_dephase,
    polarization_ket,
    polarizer_observable,
    random_density,
    random_observable,
    rotated_bell_state,
    tensor,
)

SQRT_HALF = 0.7071067811865476
COS2_PI8 = 0.8535533905932737  # cos^2(pi/8) = (2 + sqrt 2) / 4
SIN2_PI8 = 0.14644660940672624


def eig_projectors(matrix):
    """Rank-one eigenvector projectors from a numerical eigendecomposition."""
    vals, vecs = np.linalg.eigh(matrix)
    return vals, [np.outer(v, v.conj()) for v in vecs.T]


def bell_density():
    return bell_state().density()


# -- polarizer observables -------------------------------------------------------------

def test_polarizer_at_zero_is_z():
    np.testing.assert_allclose(polarizer_observable(0.0).matrix, np.diag([1, -1]), atol=0)


def test_polarizer_at_quarter_pi_is_x():
    np.testing.assert_allclose(polarizer_observable(np.pi / 4).matrix, PAULI_X, atol=1e-15)


def test_polarizer_at_eighth_pi():
    obs = polarizer_observable(np.pi / 8)
    np.testing.assert_allclose(obs.matrix, SQRT_HALF * (PAULI_Z + PAULI_X), atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(obs.matrix), [-1, 1], atol=1e-12)


def test_polarizer_is_pi_periodic(rng):
    for theta in rng.uniform(-10, 10, 20):
        np.testing.assert_allclose(polarizer_observable(theta).matrix,
                                   polarizer_observable(theta + np.pi).matrix, atol=1e-12)
        np.testing.assert_allclose(polarizer_observable(theta).matrix,
                                   polarizer_observable(canonical_angle(theta)).matrix, atol=1e-12)


def test_canonical_angle_range():
    for theta in (-1e-18, -np.pi, 0.0, np.pi, 7.5, -3.0):
        assert 0 <= canonical_angle(theta) < np.pi


def test_polarization_kets_are_eigenvectors(rng):
    for theta in rng.uniform(0, np.pi, 10):
        obs = polarizer_observable(theta).matrix
        for sign in (1, -1):
            ket = polarization_ket(theta, sign)
            np.testing.assert_allclose(obs @ ket, sign * ket, atol=1e-12)


def test_observable_rejects_non_dichotomic():
    with pytest.raises(ValueError, match="dichotomic"):
        Observable(np.diag([1.0, 0.5]))
    with pytest.raises(ValueError, match="Hermitian"):
        Observable(np.array([[1, 1], [0, -1]]))


def test_degenerate_observable_uses_eigenspace_projectors():
    obs = tensor(polarizer_observable(0.0), Observable(np.eye(2)))  # Z (x) I, doubly degenerate
    projs = obs.projectors()
    np.testing.assert_allclose(projs[1], np.diag([1, 1, 0, 0]), atol=0)
    np.testing.assert_allclose(projs[-1], np.diag([0, 0, 1, 1]), atol=0)
    assert list(Observable(np.eye(2)).projectors()) == [1]


# -- states -----------------------------------------------------------------------------

def test_bell_state_amplitudes():
    np.testing.assert_array_equal(bell_state().amplitudes, [SQRT_HALF, 0, 0, SQRT_HALF])
    assert abs(np.linalg.norm(bell_state().amplitudes) - 1) < 1e-12


def test_bell_state_zz_correlation():
    assert expectation(bell_density(), tensor(polarizer_observable(0), polarizer_observable(0))) == pytest.approx(1, abs=1e-12)


def test_pure_state_validation():
    with pytest.raises(ValueError, match="normalized"):
        PureState([1, 1])
    with pytest.raises(DimensionError):
        PureState([1, 0, 0])


def test_density_operator_validation():
    with pytest.raises(ValueError, match="trace"):
        DensityOperator(np.eye(2))
    with pytest.raises(ValueError, match="Hermitian"):
        DensityOperator(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValueError, match="positive"):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        DensityOperator(np.eye(3) / 3)


def test_density_tolerates_rounding_negative_eigenvalue():
    rho = DensityOperator(np.diag([1 + 5e-11, -5e-11]))
    assert rho.eigenvalues().min() == 0.0


def test_density_operator_is_immutable():
    rho = bell_density()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0


def test_rotated_bell_state_identity_and_periodicity():
    assert rotated_bell_state(0.0).allclose(bell_density())
    assert rotated_bell_state(np.pi / 2).allclose(rotated_bell_state(0.0))


def test_rotated_bell_state_invariance(rng):
    ref = rotated_bell_state(0.0).matrix
    for theta in rng.uniform(0, 2 * np.pi, 100):
        assert np.max(np.abs(rotated_bell_state(theta).matrix - ref)) <= 1e-12


def test_rotated_bell_state_uses_observable_eigenvectors(rng):
    # build the state from a numerical eigendecomposition instead of closed-form kets
    for theta in rng.uniform(0, np.pi, 10):
        vals, vecs = np.linalg.eigh(polarizer_observable(theta).matrix)
        minus, plus = vecs[:, 0], vecs[:, 1]
        psi = (np.kron(plus, plus) + np.kron(minus, minus)) / np.sqrt(2)
        np.testing.assert_allclose(rotated_bell_state(theta).matrix, np.outer(psi, psi.conj()), atol=1e-12)


# -- expectation ------------------------------------------------------------------------

def test_expectation_at_zero_and_eighth_pi():
    value = expectation(bell_density(), tensor(polarizer_observable(0), polarizer_observable(np.pi / 8)))
    assert value == pytest.approx(SQRT_HALF, abs=1e-12)


def test_expectation_closed_form_grid():
    rho = bell_density()
    grid = np.linspace(0, np.pi, 32)
    for ta in grid:
        for tb in grid:
            assert correlation(rho, ta, tb) == pytest.approx(np.cos(2 * (ta - tb)), abs=1e-10)


def test_expectation_pauli_decomposition():
    # <ZZ> = <XX> = 1 and <ZX> = <XZ> = 0 for the Bell state
    rho = bell_density()
    z, x = Observable(PAULI_Z), Observable(PAULI_X)
    assert expectation(rho, tensor(z, z)) == pytest.approx(1, abs=1e-12)
    assert expectation(rho, tensor(x, x)) == pytest.approx(1, abs=1e-12)
    assert expectation(rho, tensor(z, x)) == pytest.approx(0, abs=1e-12)
    assert expectation(rho, tensor(x, z)) == pytest.approx(0, abs=1e-12)


def test_expectation_maximally_mixed_is_zero(rng):
    for ta, tb in rng.uniform(0, np.pi, (10, 2)):
        assert correlation(maximally_mixed(4), ta, tb) == pytest.approx(0, abs=1e-15)


def test_expectation_dimension_mismatch():
    with pytest.raises(DimensionError):
        expectation(bell_density(), polarizer_observable(0))


def test_tsirelson_point():
    rho = bell_density()
    ta, tap, tb, tbp = 0.0, np.pi / 4, np.pi / 8, 3 * np.pi / 8
    s = (correlation(rho, ta, tb) - correlation(rho, ta, tbp)
         + correlation(rho, tap, tb) + correlation(rho, tap, tbp))
    assert s == pytest.approx(2 * np.sqrt(2), abs=1e-10)


# -- dephasing channels -----------------------------------------------------------------

def test_dephase_diagonal_state_unchanged():
    rho = DensityOperator(np.diag([0.3, 0.7]))
    assert dephase(rho, polarizer_observable(0)).allclose(rho)


def test_dephase_tilted_state_in_z():
    ket = polarization_ket(np.pi / 8, 1)
    rho = DensityOperator(np.outer(ket, ket.conj()))
    out = dephase(rho, polarizer_observable(0)).matrix
    np.testing.assert_allclose(out, np.diag([COS2_PI8, SIN2_PI8]), atol=1e-12)
    _, projs = eig_projectors(PAULI_Z)
    brute = sum(p @ rho.matrix @ p for p in projs)
    np.testing.assert_allclose(out, brute, atol=1e-12)


def test_dephase_matches_eigenvector_sandwich(rng):
    for _ in range(20):
        rho = random_density(4, rng)
        obs = random_observable(4, rng, n_plus=2)
        vals, projs = eig_projectors(obs.matrix)
        # group rank-one projectors into eigenspaces by eigenvalue sign
        plus = sum(p for v, p in zip(vals, projs) if v > 0)
        minus = sum(p for v, p in zip(vals, projs) if v < 0)
        brute = plus @ rho.matrix @ plus + minus @ rho.matrix @ minus
        np.testing.assert_allclose(dephase(rho, obs).matrix, brute, atol=1e-12)


def test_dephase_preserves_statistics_and_is_idempotent(rng):
    for _ in range(100):
        dim = int(rng.choice([2, 4]))
        rho = random_density(dim, rng)
        obs = random_observable(dim, rng)
        once = dephase(rho, obs)
        assert expectation(once, obs) == pytest.approx(expectation(rho, obs), abs=1e-12)
        assert dephase(once, obs).allclose(once, atol=1e-12)
        assert abs(np.trace(once.matrix) - 1) <= 1e-12
        assert np.max(np.abs(once.matrix - once.matrix.conj().T)) <= 1e-12


def test_dephase_result_commutes_with_observable(rng):
    rho = random_density(2, rng)
    obs = polarizer_observable(0.3)
    out = dephase(rho, obs).matrix
    np.testing.assert_allclose(out @ obs.matrix, obs.matrix @ out, atol=1e-12)


def test_noncommuting_effective_distributions_differ(rng):
    for _ in range(50):
        rho = random_density(2, rng)
        t1, t2 = rng.uniform(0, np.pi, 2)
        if abs(np.sin(2 * (t1 - t2))) < 1e-2:
            continue
        diff = dephase(rho, polarizer_observable(t1)).matrix - dephase(rho, polarizer_observable(t2)).matrix
        assert np.max(np.abs(diff)) > 1e-6


def test_partial_dephase_both_sides_equals_collapse_on_bell(rng):
    rho = bell_density()
    for theta in np.r_[0.0, np.pi / 8, rng.uniform(0, np.pi, 10)]:
        obs = polarizer_observable(theta)
        both = partial_dephase(partial_dephase(rho, obs, 1), obs, 2)
        assert both.allclose(measure_collapse(rho, theta), atol=1e-12)


def test_partial_dephase_product_state_unchanged(rng):
    rho1 = DensityOperator(np.diag([0.2, 0.8]))
    rho2 = random_density(2, rng)
    prod = DensityOperator(np.kron(rho1.matrix, rho2.matrix))
    assert partial_dephase(prod, polarizer_observable(0), 1).allclose(prod)


def test_partial_dephase_is_local(rng):
    # dephasing photon 1 equals dephasing the Z (x) I observable on the pair
    rho = random_density(4, rng)
    obs = random_observable(2, rng, n_plus=1)
    lifted = Observable(np.kron(obs.matrix, np.eye(2)))
    assert partial_dephase(rho, obs, 1).allclose(dephase(rho, lifted), atol=1e-12)


def test_partial_dephase_trace_and_errors(rng):
    for _ in range(20):
        rho = random_density(4, rng)
        out = partial_dephase(rho, random_observable(2, rng, n_plus=1), int(rng.integers(1, 3)))
        assert abs(np.trace(out.matrix) - 1) <= 1e-12
    with pytest.raises(ValueError, match="subsystem"):
        partial_dephase(bell_density(), polarizer_observable(0), 3)
    with pytest.raises(DimensionError):
        partial_dephase(maximally_mixed(2), polarizer_observable(0), 1)


def test_measure_collapse_bell_at_zero():
    np.testing.assert_allclose(measure_collapse(bell_density(), 0.0).matrix,
                               np.diag([0.5, 0, 0, 0.5]), atol=1e-12)


def test_measure_collapse_bell_spectrum_and_form(rng):
    for theta in rng.uniform(0, np.pi, 10):
        out = measure_collapse(bell_density(), theta)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(out.matrix)), [0, 0, 0.5, 0.5], atol=1e-12)
        vals, vecs = np.linalg.eigh(polarizer_observable(theta).matrix)
        minus, plus = vecs[:, 0], vecs[:, 1]
        pp, mm = np.kron(plus, plus), np.kron(minus, minus)
        expected = 0.5 * (np.outer(pp, pp.conj()) + np.outer(mm, mm.conj()))
        np.testing.assert_allclose(out.matrix, expected, atol=1e-12)


def test_measure_collapse_mixed_fixed_point(rng):
    for theta in rng.uniform(0, np.pi, 5):
        assert measure_collapse(maximally_mixed(4), theta).allclose(maximally_mixed(4))


# -- joint probabilities ----------------------------------------------------------------

def test_joint_probabilities_equal_angles():
    np.testing.assert_allclose(joint_probabilities(bell_density(), 0, 0), [0.5, 0, 0, 0.5], atol=1e-12)


def test_joint_probabilities_eighth_pi():
    probs = joint_probabilities(bell_density(), 0, np.pi / 8)
    np.testing.assert_allclose(probs, [COS2_PI8 / 2, SIN2_PI8 / 2, SIN2_PI8 / 2, COS2_PI8 / 2], atol=1e-12)


def test_joint_probabilities_reconstruct_correlation(rng):
    for _ in range(20):
        rho = random_density(4, rng)
        ta, tb = rng.uniform(0, np.pi, 2)
        p = joint_probabilities(rho, ta, tb)
        assert p.min() >= 0 and p.sum() == pytest.approx(1, abs=1e-10)
        assert p[0] + p[3] - p[1] - p[2] == pytest.approx(correlation(rho, ta, tb), abs=1e-12)


# -- serialization ----------------------------------------------------------------------

def test_matrix_text_round_trip_is_exact(rng):
    m = random_density(4, rng).matrix
    assert np.array_equal(matrix_from_text(matrix_to_text(m)), m)


def test_matrix_text_format():
    text = matrix_to_text(np.diag([1 / 3, 2 / 3]))
    lines = text.splitlines()
    assert len(lines) == 2 and len(lines[0].split()) == 2
    assert lines[0].split()[0] == "0.33333333333333331,0"


def test_golden_collapse_matrix(tmp_path):
    from pathlib import Path
    golden = Path(__file__).parent / "golden" / "collapse_bell_pi8.txt"
    expected = matrix_from_text(golden.read_text())
    np.testing.assert_allclose(measure_collapse(bell_density(), np.pi / 8).matrix, expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_correlation_law_property(ta, tb):
    assert correlation(bell_density(), ta, tb) == pytest.approx(np.cos(2 * (ta - tb)), abs=1e-10)
