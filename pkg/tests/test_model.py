import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophoton import ModelParams, ParitySector, SectorState, coefficients, sector_of
from twophoton.model import (
    lab_hamiltonian_matrix,
    rotated_basis_vector,
    rotated_hamiltonian_matrix,
)

SECTORS = list(ParitySector)


@pytest.mark.parametrize("n, spin, expected", [
    (0, -1, ParitySector.PLUS_ONE),
    (0, 1, ParitySector.MINUS_ONE),
    (2, -1, ParitySector.MINUS_ONE),
    (2, 1, ParitySector.PLUS_ONE),
    (1, -1, ParitySector.PLUS_I),
    (1, 1, ParitySector.MINUS_I),
])
def test_sector_of_examples(n, spin, expected):
    assert sector_of(n, spin) is expected


def test_sector_of_matches_decoupled_energy():
    # at g = 0 the state |n, spin> must sit on the chain whose A_0 is its energy
    p = ModelParams(1.0, 0.8, 0.0)
    for n in range(8):
        for spin in (1, -1):
            s = SectorState.from_fock(n, spin)
            energy = n + 0.5 * 0.8 * spin
            assert coefficients(p, s.sector).diag(s.index) == pytest.approx(energy)


@pytest.mark.parametrize("bad", [(-1, 1), (0, 0), (3, 2)])
def test_sector_of_rejects(bad):
    with pytest.raises(ValueError):
        sector_of(*bad)


def test_parity_parse_aliases():
    assert ParitySector.parse("+1") is ParitySector.PLUS_ONE
    assert ParitySector.parse("-i") is ParitySector.MINUS_I
    assert str(ParitySector.PLUS_I) == "+i"


def test_coefficient_examples():
    p = ModelParams(1.0, 0.8, 0.3)
    c = coefficients(p, ParitySector.PLUS_ONE)
    assert c.diag(0) == pytest.approx(-0.4)
    assert c.diag(1) == pytest.approx(2.4)
    assert c.offdiag(1) == pytest.approx(0.3 * math.sqrt(2))
    ci = coefficients(p, ParitySector.PLUS_I)
    assert ci.diag(0) == pytest.approx(0.6)
    assert ci.offdiag(0) == 0.0
    assert ci.offdiag(1) == pytest.approx(0.3 * math.sqrt(6))


@pytest.mark.parametrize("sector", SECTORS)
def test_decoupled_chain(sector):
    c = coefficients(ModelParams(1.0, 0.5, 0.0), sector)
    assert np.all(c.offdiag(np.arange(50)) == 0)


@pytest.mark.parametrize("sector", SECTORS)
def test_coefficients_match_rotated_matrix(sector):
    p = ModelParams(1.0, 0.8, 0.3)
    n_ph = 2 * 22 + 2
    h = rotated_hamiltonian_matrix(p, n_ph)
    c = coefficients(p, sector)
    vecs = [rotated_basis_vector(sector, j, n_ph) for j in range(22)]
    for j in range(21):
        assert np.vdot(vecs[j], h @ vecs[j]).real == pytest.approx(c.diag(j), abs=1e-12)
        assert abs(np.vdot(vecs[j], h @ vecs[j + 1])) == pytest.approx(c.offdiag(j + 1), abs=1e-12)
        # tridiagonal: nothing two sites away
        if j + 2 < 22:
            assert abs(np.vdot(vecs[j], h @ vecs[j + 2])) < 1e-12


def test_lab_resolvent_matches_chain():
    from twophoton.contfrac import resolvent

    p = ModelParams(1.0, 0.8, 0.2)
    n_ph = 160
    h = lab_hamiltonian_matrix(p, n_ph)
    z = 1.3 - 0.05j
    g = np.linalg.inv(z * np.eye(2 * n_ph) - h)
    for m in range(6):
        for spin, s in ((1, 0), (-1, 1)):
            state = SectorState.from_fock(m, spin)
            cf = resolvent(p, state, z, 60)
            assert cf == pytest.approx(g[2 * m + s, 2 * m + s], rel=1e-9)


def test_chains_cover_fock_space_once():
    seen = set()
    for n in range(41):
        for spin in (1, -1):
            s = SectorState.from_fock(n, spin)
            assert s.photon_number == n
            seen.add((s.sector, s.index))
    assert len(seen) == 82


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.1, 10), w0=st.floats(0, 2), g=st.floats(0, 0.6),
       sector=st.sampled_from(SECTORS))
def test_scaling(lam, w0, g, sector):
    p = ModelParams(1.0, w0, g)
    j = np.arange(30)
    a, b = coefficients(p, sector), coefficients(p.scaled(lam), sector)
    np.testing.assert_allclose(b.diag(j), lam * a.diag(j), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(b.offdiag(j), lam * a.offdiag(j), rtol=1e-12, atol=1e-12)


def test_asymptotic_growth():
    p = ModelParams(1.0, 0.8, 0.3)
    j = 10**6
    assert coefficients(p, ParitySector.PLUS_ONE).diag(j) / (2 * j) == pytest.approx(1, rel=1e-6)
    assert coefficients(p, ParitySector.MINUS_I).diag(j) / (2 * j + 1) == pytest.approx(1, rel=1e-6)


@pytest.mark.parametrize("kw", [dict(omega=0), dict(omega0=-1), dict(g=-0.1)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)
