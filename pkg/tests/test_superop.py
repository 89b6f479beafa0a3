import numpy as np
import pytest

from oscbath import superop as so


def random_op(rng, n, hermitian=False):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.conj().T if hermitian else A


def random_density(rng, n):
    A = random_op(rng, n)
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def apply(S, rho):
    return so.unvec(S @ so.vec(rho), rho.shape[0])


def test_vectorization_convention(rng):
    A, B, rho = (random_op(rng, 5) for _ in range(3))
    np.testing.assert_allclose(np.kron(B.T, A) @ so.vec(rho), so.vec(A @ rho @ B), atol=1e-12)


def test_identity_superoperators():
    I = np.eye(4)
    assert np.all(so.commutator_super(I) == 0)
    np.testing.assert_array_equal(so.anticommutator_super(I), 2 * np.eye(16))


def test_destroy_on_fock_one():
    a = so.destroy(4)
    rho = so.fock_state(1, 4)
    out = apply(so.commutator_super(a), rho)
    expected = np.zeros((4, 4), complex)
    expected[0, 1] = 1.0
    expected[1, 2] = -np.sqrt(2)
    np.testing.assert_allclose(out, a @ rho - rho @ a, atol=1e-15)
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_anticommutator_trace_linearity(rng):
    A, rho = random_op(rng, 6), random_density(rng, 6)
    assert np.trace(apply(so.anticommutator_super(A), rho)) == pytest.approx(2 * np.trace(A @ rho))


def test_non_square_rejected():
    with pytest.raises(ValueError):
        so.commutator_super(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        so.anticommutator_super(np.zeros(3))


def test_rotation_special_times():
    X, P = so.quadratures(8)
    X0, P0 = so.rotate_quadratures(0.0, dim=8)
    np.testing.assert_array_equal(X0, X)
    np.testing.assert_array_equal(P0, P)
    Xq, Pq = so.rotate_quadratures(np.pi / 2, dim=8)
    np.testing.assert_allclose(Xq, P, atol=1e-15)
    np.testing.assert_allclose(Pq, -X, atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 7.1])
def test_canonical_commutator_on_leading_block(t):
    n = 10
    Xt, Pt = so.rotate_quadratures(t, dim=n)
    c = Xt @ Pt - Pt @ Xt
    np.testing.assert_allclose(c[:-1, :-1], 1j * np.eye(n - 1), atol=1e-12)
    assert abs(c[-1, -1] - 1j) > 1


def test_hermiticity_propagation(rng):
    A, rho = random_op(rng, 6, hermitian=True), random_density(rng, 6)
    s = apply(so.anticommutator_super(A), rho)
    c = 1j * apply(so.commutator_super(A), rho)
    np.testing.assert_allclose(s, s.conj().T, atol=1e-12)
    np.testing.assert_allclose(c, c.conj().T, atol=1e-12)


def test_dissipator_preserves_trace(rng):
    L = random_op(rng, 5)
    D = so.dissipator_super(L)
    rho = random_density(rng, 5)
    assert abs(np.trace(apply(D, rho))) < 1e-12


def test_rotating_frame_dissipator_identity(rng):
    """Averaging the position-coupled generator over a period leaves the
    two-dissipator form, checked on states supported away from the cutoff."""
    n, delta, gamma = 12, 0.7, 0.3
    ts = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    avg = np.zeros((n * n, n * n), complex)
    for t in ts:
        Xt, Pt = so.rotate_quadratures(t, dim=n)
        XS = so.commutator_super(Xt)
        avg -= delta * XS @ XS + 1j * gamma * XS @ so.anticommutator_super(Pt)
    avg /= ts.size
    a = so.destroy(n)
    lind = (delta + gamma) * so.dissipator_super(a) + (delta - gamma) * so.dissipator_super(a.conj().T)
    rho = np.zeros((n, n), complex)
    rho[:5, :5] = random_density(rng, 5)
    out_a, out_b = apply(avg, rho), apply(lind, rho)
    np.testing.assert_allclose(out_a[:n - 3, :n - 3], out_b[:n - 3, :n - 3], atol=1e-12)


def test_density_checks():
    with pytest.raises(ValueError):
        so.check_density_matrix(np.array([[1, 1], [0, 0]], complex))
    with pytest.raises(ValueError):
        so.check_density_matrix(np.eye(2))
    th = so.thermal_state(0.5, 30)
    assert so.check_density_matrix(th) >= 0
    assert np.real(np.trace(so.number(30) @ th)) == pytest.approx(0.5, rel=1e-6)
