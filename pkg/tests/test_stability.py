import math

import numpy as np
import pytest

from fracwave import newton as nt
from fracwave import stability as sb
from fracwave.errors import DegenerateD, InconsistentSpacing
from fracwave.oracles import dnoidal_profile, rbo_profile
from fracwave.petviashvili import SolverConfig, solve_wave_at_speed
from fracwave.spectral import Grid, PeriodicField, b_functional, derivative, inner


def complex_matrix(phi, c, alpha, K):
    """(c|k|^alpha + c - 1) delta_kj - phi_hat(k - j) on k, j = -K..K."""
    ks = np.arange(-K, K + 1)
    co = np.array(phi.coeffs)
    co[-1] = 0

    def hat(m):
        if abs(m) >= len(co):
            return 0.0
        return co[m] if m >= 0 else np.conj(co[-m])

    M = np.array([[-hat(k - j) for j in ks] for k in ks], dtype=complex)
    M += np.diag(c * np.abs(ks) ** alpha + c - 1)
    return M


def test_bifurcation_point_diagonal():
    phi = PeriodicField.constant(Grid(64), 0.0)
    op = sb.assemble_operator(phi, 0.5, 1.3, K=8)
    assert np.allclose(np.diag(op.matrix)[:9], 0.5 * (np.arange(9) ** 1.3 - 1))
    n_neg, n_zero, _ = sb.eigen_counts(op)
    assert (n_neg, n_zero) == (1, 2)


def test_adjacent_cosine_entries():
    eps = 0.1
    phi = PeriodicField.from_function(Grid(64), lambda x: eps * np.cos(x))
    op = sb.assemble_operator(phi, 1.0, 1.0, K=3)
    m = op.matrix
    assert m[1, 2] == pytest.approx(-eps / 2, abs=1e-15)
    assert m[4, 5] == pytest.approx(-eps / 2, abs=1e-15)
    # the mean mode couples with the orthonormal weight sqrt(2)
    assert m[0, 1] == pytest.approx(-eps / math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("K", [1, 4, 16])
def test_real_basis_equivalent_to_complex_modes(K):
    rng = np.random.default_rng(K)
    co = np.zeros(33, dtype=complex)
    co[1:8] = (rng.normal(size=7) + 1j * rng.normal(size=7)) / np.arange(1, 8) ** 2
    phi = PeriodicField.from_coeffs(Grid(64), co)
    op = sb.assemble_operator(phi, 0.9, 0.7, K)
    assert np.max(np.abs(op.matrix - op.matrix.T)) <= 1e-12
    ev_real = sb.operator_eigenvalues(op)
    ev_cplx = np.linalg.eigvalsh(complex_matrix(phi, 0.9, 0.7, K))
    assert np.allclose(ev_real, ev_cplx, atol=1e-12)


def test_dnoidal_translation_kernel():
    c = 1.2181
    phi = dnoidal_profile(c, Grid(1024)).field
    K = 128
    op = sb.assemble_operator(phi, c, 2.0, K)
    b = phi.cosine_coefficients(K)
    v = np.zeros(2 * K + 1)
    v[K + 1:] = -np.arange(1, K + 1) * b * math.sqrt(math.pi)  # phi' in the sine block
    r = op.matrix @ v
    op_norm = np.max(np.abs(sb.operator_eigenvalues(op)))
    assert np.linalg.norm(r) <= 1e-7 * op_norm * np.linalg.norm(v)
    assert sb.kernel_residual(phi, c, 2.0, op_norm / c) <= 1e-6


def test_dnoidal_counts_and_resolution():
    c = 1.2181
    phi = dnoidal_profile(c, Grid(1024)).field
    counts = [sb.eigen_counts(sb.assemble_operator(phi, c, 2.0, K, "L_tilde"))[:2] for K in (64, 128, 256)]
    assert counts == [(1, 1)] * 3


def test_alpha045_inside_fold_has_two_negative():
    sol = sb.NewtonBranch(0.45).solve(0.7)
    ap = nt.aprime_exact(nt.coefficients_of(sol), sol.c, 0.45)
    rep = sb.report(sol, ap)
    assert rep.d > 0
    assert (rep.n_neg, rep.n_zero) == (2, 1)
    assert rep.kernel_residual <= 1e-6


def test_negative_direction(small_wave):
    sol = small_wave
    Lphi = sb.apply_operator(sol.phi, sol.phi, sol.c, sol.alpha)
    val = inner(Lphi, sol.phi)
    assert val < 0
    assert val == pytest.approx(-2 * b_functional(sol.phi, sol.c, sol.alpha), rel=1e-9)


class R:
    def __init__(self, c, A, method="x", gamma=0.0):
        self.c, self.A, self.method, self.gamma = c, A, method, gamma


def test_indicator_d_analytic_alpha1():
    c, h = 1.2192, 1e-3
    rows = [R(x, 4 * x * x - 2 * x) for x in (c - h, c, c + h)]
    assert sb.indicator_d(rows) == pytest.approx(1 - 3 * c, abs=1e-9)
    assert sb.indicator_d(rows) == pytest.approx(-2.6576, abs=1e-9)


def test_indicator_d_spacing_and_method_checks():
    with pytest.raises(InconsistentSpacing):
        sb.indicator_d([R(1.0, 0), R(1.1, 0), R(1.3, 0)])
    with pytest.raises(InconsistentSpacing):
        sb.indicator_d([R(1.0, 0, "a"), R(1.1, 0, "a"), R(1.2, 0, "b")])
    assert issubclass(InconsistentSpacing, ValueError)


def test_det_s0_formula():
    with pytest.raises(DegenerateD):
        sb.det_s0(1e-9, 1.0, 1.0, 1.0)
    assert sb.det_s0(-1.0, 2.0, 1.0, 1.0) < 0
    assert sb.det_s0(1.0, 2.0, 1.0, 1.0) > 0


def test_det_s0_alpha1_analytic():
    c = 1.2192
    phi = rbo_profile(c, Grid(512)).field
    ap = 8 * c - 2
    d = 1 + 2 * (4 * c * c - 2 * c) - c - c * ap
    assert sb.det_s0(d, ap, b_functional(phi, c, 1.0), c) < 0


def test_gamma_prime_crosscheck_alpha2():
    cfg = SolverConfig(n_points=512)
    c, h = 1.2, 1e-3
    sols = [solve_wave_at_speed(x, 2.0, cfg) for x in (c - h, c, c + h)]
    rows = [R(s.c, s.A, "petviashvili", sb.gamma_of(s.phi)) for s in sols]
    rows[0].c, rows[2].c = c - h, c + h
    fd, ident = sb.gamma_prime_crosscheck(sols[1].phi, c, sols[1].A, rows)
    assert abs(fd - ident) <= 1e-4 * abs(ident)
    # the minus-sign variant does not match
    tab = sb.gamma_prime_identity_tabulated(c, sols[1].A, sb.gamma_of(sols[1].phi))
    assert abs(fd - tab) > 0.1 * abs(ident)


def test_gamma_prime_trivial_branch():
    assert sb.gamma_prime_identity(0.7, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("alpha,c", [(2.0, 0.8), (1.0, 1.5), (0.45, 1.2)])
def test_s0_closed_form_against_inversion(alpha, c):
    K = 256
    sol = nt.continuation(alpha, [0.501, c], K, K_max=2048)[-1]
    ap = nt.aprime_exact(nt.coefficients_of(sol), c, alpha)
    d = sb.d_value(c, sol.A, ap)
    S = sb.s0_matrix(c, d, sol.A, ap, sb.gamma_of(sol.phi))
    S_inv = sb.s0_by_inversion(sol.phi, c, alpha)
    assert np.allclose(S, S_inv, rtol=1e-6, atol=1e-8 * np.max(np.abs(S)))
    det = sb.det_s0_closed(c, d, sol.A, ap, b_functional(sol.phi, c, alpha))
    assert det == pytest.approx(np.linalg.det(S_inv), rel=1e-6)
    # tabulated closed form: same sign
    assert np.sign(sb.det_s0(d, ap, b_functional(sol.phi, c, alpha), c)) == np.sign(det)


def test_verdicts():
    assert sb.verdict_from(1, 1, 1e-9, np.eye(2)) == "degenerate"
    assert sb.verdict_from(1, 2, -1.0, np.eye(2)) == "degenerate"
    assert sb.verdict_from(1, 1, -1.0, np.diag([-1.0, 2.0])) == "stable"
    assert sb.verdict_from(2, 1, 1.0, np.diag([-1.0, -2.0])) == "stable"
    assert sb.verdict_from(2, 1, 1.0, np.diag([-1.0, 2.0])) == "unstable"


def test_report_dnoidal(small_wave):
    sol = small_wave
    b = nt.coefficients_of(nt.newton_solve(sol.c, 2.0, sol.phi.cosine_coefficients(64)))
    rep = sb.report(sol, nt.aprime_exact(b, sol.c, 2.0))
    assert (rep.n_neg, rep.n_zero, rep.verdict) == (1, 1, "stable")
    assert rep.d < 0 and rep.det_s0 < 0
    assert len(rep.eigen_tail) == 6


@pytest.fixture(scope="module")
def alpha2_table():
    return sb.sweep(2.0, (0.6, 1.6), 5, SolverConfig(n_points=512), jobs=1)


def test_sweep_alpha2(alpha2_table):
    t = alpha2_table
    assert [r.method for r in t.rows] == ["petviashvili"] * 5
    assert np.all(t.column("d") < 0)
    assert np.all(np.diff(t.column("c")) > 0) and np.all(np.diff(t.column("A")) > 0)
    assert all((r.n_neg, r.n_zero, r.verdict) == (1, 1, "stable") for r in t.rows)
    assert sb.critical_speed(t) is None
    for r in t.rows:
        assert r.A > r.c - 0.5
        assert r.extras["gamma_fd"] == pytest.approx(r.extras["gamma_identity"], rel=1e-4)


def test_table_csv_round_trip(alpha2_table, tmp_path):
    path = tmp_path / "t.csv"
    text = alpha2_table.to_csv(path)
    assert text.splitlines()[0] == ",".join(sb.TABLE_HEADER)
    back = sb.ContinuationTable.from_csv(path, 2.0)
    assert [r.values() for r in back.rows] == [r.values() for r in alpha2_table.rows]
    assert back.to_csv() == text


def test_sweep_alpha1_matches_closed_form():
    t = sb.sweep(1.0, (0.7, 1.5), 3, SolverConfig(n_points=512), jobs=1)
    for r in t.rows:
        assert r.A == pytest.approx(4 * r.c ** 2 - 2 * r.c, abs=1e-9)
        assert r.Aprime == pytest.approx(8 * r.c - 2, rel=1e-5)
        assert r.d == pytest.approx(1 - 3 * r.c, abs=1e-5)


def test_sweep_rejects_low_range():
    with pytest.raises(ValueError):
        sb.sweep(1.0, (0.5, 1.0), 3)


def test_jobs_env_override(monkeypatch):
    monkeypatch.setenv("FRACWAVE_JOBS", "3")
    assert sb._jobs(8) == 3
    monkeypatch.delenv("FRACWAVE_JOBS")
    assert sb._jobs(2) == 2


def test_map_jobs_preserves_order():
    assert sb.map_jobs(abs, [-3, 1, -2], jobs=2) == [3, 1, 2]
