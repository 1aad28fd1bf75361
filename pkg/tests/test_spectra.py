import numpy as np
import pytest

from pvbs import fock, operators, spectra
from pvbs.lattice import build_box, build_tilted_case1
from pvbs.model import Params

P_CHAIN = Params(("2",), ("1/2",))


def test_dense_eigenvalues_sorted():
    v = build_box((3,))
    b = fock.enumerate_sector(v, 1, 0)
    h = operators.assemble_sector_hamiltonian(v, P_CHAIN, b)
    vals = spectra.dense_eigenvalues(h)
    assert list(vals) == sorted(vals)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)


def test_lowest_eigenvalues_dense_vs_lanczos():
    v = build_box((7,))
    b = fock.enumerate_sector(v, 2, 2)  # dim 630
    h = operators.assemble_sector_hamiltonian(v, P_CHAIN, b)
    dense = spectra.lowest_eigenvalues(h, k=3, dense_cap=10_000)
    lanczos = spectra.lowest_eigenvalues(h, k=3, dense_cap=100)
    assert np.max(np.abs(dense - lanczos)) < 1e-8


def test_deflation_removes_ground_vector():
    from pvbs import analytic
    v = build_box((5,))
    b = fock.enumerate_sector(v, 1, 0)
    h = operators.assemble_sector_hamiltonian(v, P_CHAIN, b)
    psi = analytic.ground_state_vector(v, P_CHAIN, "a", b)
    plain = spectra.lowest_eigenvalues(h, k=2)
    deflated = spectra.lowest_eigenvalues(h, k=1, deflate=psi[:, None])
    assert plain[0] == pytest.approx(0.0, abs=1e-12)
    assert deflated[0] == pytest.approx(plain[1], abs=1e-9)


def test_kernel_dimension():
    v = build_box((4,))
    total = 0
    for na in range(5):
        for nb in range(5 - na):
            b = fock.enumerate_sector(v, na, nb)
            h = operators.assemble_sector_hamiltonian(v, P_CHAIN, b)
            total += spectra.kernel_dimension(h)
    assert total == 4


def test_total_gap_chain_frozen():
    rep = spectra.total_gap(build_box((4,)), P_CHAIN)
    assert rep.kernel_total == 4
    assert not rep.partial
    assert rep.gap == pytest.approx(0.43431457505076165, rel=1e-10)


def test_total_gap_matches_bruteforce():
    # oracle: full 3^n dense spectrum, gap = smallest nonzero eigenvalue
    v = build_box((2, 2))
    p = Params(("2", "3"), ("1/2", "1/3"))
    full = np.zeros((81, 81))
    for na in range(5):
        for nb in range(5 - na):
            b = fock.enumerate_sector(v, na, nb)
            h = operators.assemble_sector_hamiltonian(v, p, b).toarray()
            full[np.ix_(b.states, b.states)] = h
    vals = np.linalg.eigvalsh(full)
    kernel = int(np.count_nonzero(vals < 1e-8))
    oracle_gap = vals[kernel]
    rep = spectra.total_gap(v, p)
    assert kernel == 4 == rep.kernel_total
    assert rep.gap == pytest.approx(oracle_gap, rel=1e-9)


def test_total_gap_tilted_volume():
    v = build_tilted_case1((1,), (3, 2))
    p = Params(("2", "3"), ("1/2", "1/3"))
    rep = spectra.total_gap(v, p)
    assert rep.kernel_total == 4
    assert rep.gap > 0


def test_total_gap_sector_cap_marks_partial():
    rep = spectra.total_gap(build_box((6,)), P_CHAIN, sector_cap=50)
    assert rep.partial
    assert any(s.skipped for s in rep.sectors)


def test_total_gap_rejects_disconnected():
    from pvbs.lattice import Volume
    with pytest.raises(spectra.SpectraError):
        spectra.total_gap(Volume(1, ((0,), (2,))), P_CHAIN)


def test_gapless_scaling_flat_species():
    p = Params(("1",), ("2",))
    pts = spectra.gapless_scaling(p, [2, 3, 4], numeric_cap=6)
    assert [pt.trial_energy for pt in pts] == [0.5, 1 / 3, 0.25]
    assert all(pt.numeric_gap is not None for pt in pts)


def test_gapless_scaling_needs_flat_species():
    with pytest.raises(spectra.SpectraError):
        spectra.gapless_scaling(P_CHAIN, [2, 3])
