import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from twophoton import (
    DivergentPivot,
    ModelParams,
    NotConverged,
    ParitySector,
    ProbeEnergy,
    SectorState,
    evaluate_adaptive,
    evaluate_cf,
    pringsheim_report,
    resolvent,
)
from twophoton.contfrac import equivalence_coefficients, resolvent_adaptive
from twophoton.oracle import truncated_matrix


def inverse_element(params, state, z, size):
    m = truncated_matrix(params, state.sector, size)
    rhs = np.zeros(size, dtype=complex)
    rhs[state.index] = 1.0
    return np.linalg.solve(z * np.eye(size) - m, rhs)[state.index]


def test_decoupled_exact(vacuum):
    p = ModelParams(1.0, 0.8, 0.0)
    z = ProbeEnergy(0.3, 1e-3)
    r = evaluate_cf(p, vacuum, z, 10)
    assert r.value == pytest.approx(1 / (0.3 + 0.4 - 1e-3j), rel=1e-15)


def test_three_by_three(vacuum):
    p = ModelParams(1.0, 0.8, 0.1)
    z = 1 - 0.001j
    assert evaluate_cf(p, vacuum, ProbeEnergy(1, 0.001), 2).value == pytest.approx(
        inverse_element(p, vacuum, z, 3), rel=1e-13)


def test_five_hundred_matrix():
    # truncation N keeps sites 0..N, i.e. an (N+1)-dimensional matrix
    p = ModelParams(1.0, 0.8, 0.3)
    s = SectorState(ParitySector.PLUS_ONE, 1)
    v = evaluate_cf(p, s, ProbeEnergy(3, 5e-4), 499).value
    ref = inverse_element(p, s, 3 - 5e-4j, 500)
    assert abs(v - ref) / abs(ref) < 1e-10


@settings(max_examples=60, deadline=None)
@given(g=st.floats(0, 0.6), w0=st.floats(0, 1.5), E=st.floats(-2, 20),
       log_eps=st.floats(-6, 0), n=st.integers(0, 5), N=st.integers(8, 500),
       sector=st.sampled_from(list(ParitySector)))
def test_oracle_equivalence(g, w0, E, log_eps, n, N, sector):
    assume(N >= n + 2)
    p = ModelParams(1.0, w0, g)
    s = SectorState(sector, n)
    z = complex(E, -10**log_eps)
    v = resolvent(p, s, z, N - 1)
    ref = inverse_element(p, s, z, N)
    assert abs(v - ref) / abs(ref) < 1e-9


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0, 0.5), E=st.floats(-2, 30), log_eps=st.floats(-6, 0),
       n=st.integers(0, 4), sector=st.sampled_from(list(ParitySector)))
def test_sign_and_conjugate_symmetry(g, E, log_eps, n, sector):
    p = ModelParams(1.0, 0.8, g)
    s = SectorState(sector, n)
    eps = 10**log_eps
    lower = resolvent(p, s, complex(E, -eps), 400)
    upper = resolvent(p, s, complex(E, eps), 400)
    assert lower.imag > 0
    assert upper == pytest.approx(lower.conjugate(), rel=1e-13)


@pytest.mark.parametrize("g", [0.2, 0.35, 0.45])
def test_residual_shrinks(vacuum, g):
    p = ModelParams(1.0, 0.8, g)
    z = 0.7 - 5e-4j
    sizes = [64 * 2**k for k in range(7)]
    vals = [resolvent(p, vacuum, z, n) for n in sizes]
    res = [abs(b - a) / abs(b) for a, b in zip(vals, vals[1:])]
    burn = 2
    tail = [r for r in res[burn:] if r > 1e-15]
    assert all(b < a for a, b in zip(tail, tail[1:]))


def test_vectorized_matches_scalar(vacuum):
    p = ModelParams(1.0, 0.8, 0.3)
    z = np.linspace(-1, 5, 7) - 1e-3j
    vec = resolvent(p, vacuum, z, 200)
    for zi, vi in zip(z, vec):
        assert resolvent(p, vacuum, zi, 200) == vi


def test_truncation_preconditions(vacuum):
    p = ModelParams(1.0, 0.8, 0.3)
    with pytest.raises(ValueError):
        evaluate_cf(p, SectorState(ParitySector.PLUS_ONE, 3), ProbeEnergy(0, 1e-3), 4)
    with pytest.raises(ValueError):
        ProbeEnergy(0.0, 0.0)


def test_divergent_pivot(vacuum):
    p = ModelParams(1.0, 0.8, 0.0)
    with pytest.raises(DivergentPivot):
        resolvent(p, vacuum, complex(-0.4, 0.0), 10)


def test_adaptive_decoupled(vacuum):
    r = evaluate_adaptive(ModelParams(1.0, 0.8, 0.0), vacuum, ProbeEnergy(0, 5e-4))
    assert r.converged and r.residual == 0.0 and r.truncation == 64


def test_adaptive_depth_grows_towards_collapse(vacuum):
    z = ProbeEnergy(0.0, 5e-4)
    depths = []
    for g in (0.3, 0.45, 0.49):
        r = evaluate_adaptive(ModelParams(1.0, 0.8, g), vacuum, z, tol=1e-8)
        assert r.converged and r.residual < 1e-8
        depths.append(r.truncation)
    assert depths == sorted(depths) and depths[0] < depths[-1]


def test_adaptive_at_collapse_best_effort(vacuum, caplog):
    p = ModelParams(1.0, 0.8, 0.5)
    z = ProbeEnergy(0.3, 5e-4)
    r = evaluate_adaptive(p, vacuum, z, tol=1e-14, n_max=24000)
    assert r.truncation == 24000 and not r.converged
    assert np.isfinite(r.value)
    with pytest.raises(NotConverged) as info:
        evaluate_adaptive(p, vacuum, z, tol=1e-14, n_max=24000, strict=True)
    assert info.value.result.value == r.value


def test_adaptive_per_point_depths(vacuum):
    z = np.array([-3.0, 0.7, 8.0]) - 5e-4j
    vals, used, ok, _ = resolvent_adaptive(ModelParams(1.0, 0.8, 0.45), vacuum, z, 1e-10)
    assert ok.all()
    for zi, v, n in zip(z, vals, used):
        assert v == pytest.approx(resolvent(ModelParams(1.0, 0.8, 0.45), vacuum, zi, 4 * n), rel=1e-9)


@pytest.mark.parametrize("g, delta, expected", [
    (0.3, 0.01, True), (0.5, 0.01, False), (0.5, 1e-6, False), (1e-6, 0.01, True),
])
def test_pringsheim_examples(g, delta, expected):
    r = pringsheim_report(ModelParams(1.0, 0.0, g), delta)
    assert r.guaranteed is expected


def test_pringsheim_small_g_limit():
    r = pringsheim_report(ModelParams(1.0, 0.0, 1e-6))
    assert r.beta_even_limit > 1e11


def test_pringsheim_constant():
    r = pringsheim_report(ModelParams(1.0, 0.0, 0.3), 0.01)
    k = math.gamma(0.5) * math.gamma(0.25) / math.gamma(0.75)
    assert r.c == pytest.approx(-(1 / 2.01) * (1 / (4 * 0.09)) * k)


@pytest.mark.parametrize("bad", [dict(delta=0.0), dict(delta=-1.0)])
def test_pringsheim_rejects(bad):
    with pytest.raises(ValueError):
        pringsheim_report(ModelParams(1.0, 0.0, 0.3), **bad)
    with pytest.raises(ValueError):
        pringsheim_report(ModelParams(1.0, 0.0, 0.0))


def test_equivalence_products():
    # c_n in product form: c_{2n} = prod a_{odd}/a_{even}, c_{2n+1} = prod a_{even}/a_{odd}
    p = ModelParams(1.0, 0.8, 0.3)
    z = 0.5 - 5e-4j
    n_terms = 400
    alpha, _ = equivalence_coefficients(p, z, n_terms)
    j = np.arange(n_terms)
    a = 0.09 * 2 * j * (2 * j - 1.0)
    b = z - (2 * j - 0.4 * (-1.0) ** j)
    log_c = np.zeros(n_terms)
    for k in range(1, n_terms):
        # log c_k = -log a_k - log c_{k-1}, unrolled as an alternating sum
        idx = np.arange(1, k + 1)
        log_c[k] = -np.sum(((-1.0) ** (k - idx)) * np.log(a[idx]))
    np.testing.assert_allclose(alpha, np.exp(log_c) * b, rtol=1e-10)


def test_equivalence_limits():
    p = ModelParams(1.0, 0.8, 0.3)
    _, beta = equivalence_coefficients(p, 0.5 - 5e-4j, 40001)
    r = pringsheim_report(p)
    assert beta[-1].real == pytest.approx(r.beta_even_limit, rel=1e-4)
    assert beta[-2].real == pytest.approx(r.beta_odd_limit, rel=1e-4)
    assert abs(beta[-1].imag) < 1e-6
