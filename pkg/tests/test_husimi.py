import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otoclab.classical import ClassicalState, hiho, integrate
from otoclab.errors import GridTooSmall
from otoclab.evolution import evolve
from otoclab.fock import CoherentParams, FockDim, coherent_state
from otoclab.husimi import (
    HusimiGrid,
    PhaseGrid,
    count_local_maxima,
    husimi_centroid,
    husimi_norm,
    husimi_q,
    husimi_second_moments,
)

VAC_GRID = PhaseGrid(-6.0, 6.0, -6.0, 6.0, 201, 201)


def test_grid_validation():
    with pytest.raises(ValueError):
        PhaseGrid(1.0, -1.0, 0.0, 1.0, 10, 10)
    with pytest.raises(ValueError):
        PhaseGrid(-1.0, 1.0, -1.0, 1.0, 1, 10)


def test_vacuum_peak_value():
    vac = coherent_state(FockDim(20), CoherentParams(0.0, 0.0))
    hg = husimi_q(vac, PhaseGrid(-1.0, 1.0, -1.0, 1.0, 3, 3))
    # center sample sits exactly at the origin
    assert hg.values[1, 1] == pytest.approx(1 / math.pi, abs=1e-12)


def test_bounded_by_inverse_pi():
    psi = coherent_state(FockDim(100), CoherentParams(2.0, -1.0))
    hg = husimi_q(psi, VAC_GRID)
    assert np.all(hg.values >= 0.0)
    assert np.all(hg.values <= 1 / math.pi + 1e-12)


def test_coherent_closed_form():
    d = FockDim(120)
    beta_cp = CoherentParams(1.2, -0.7)
    psi = coherent_state(d, beta_cp)
    grid = PhaseGrid(-4.0, 4.0, -4.0, 4.0, 21, 21)
    hg = husimi_q(psi, grid)
    for i, q in enumerate(grid.q_axis()):
        for j, p in enumerate(grid.p_axis()):
            alpha = (q + 1j * p) / np.sqrt(2)
            expected = math.exp(-abs(alpha - beta_cp.beta) ** 2) / math.pi
            assert abs(hg.values[i, j] - expected) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(
    bq=st.floats(-2, 2), bp=st.floats(-2, 2),
    aq=st.floats(-3, 3), ap=st.floats(-3, 3),
)
def test_coherent_closed_form_property(bq, bp, aq, ap):
    d = FockDim(100)
    psi = coherent_state(d, CoherentParams(bq, bp))
    span = 1e-3
    grid = PhaseGrid(aq - span, aq + span, ap - span, ap + span, 2, 2)
    hg = husimi_q(psi, grid)
    alpha = (grid.q_axis()[0] + 1j * grid.p_axis()[0]) / np.sqrt(2)
    beta = CoherentParams(bq, bp).beta
    assert abs(hg.values[0, 0] - math.exp(-abs(alpha - beta) ** 2) / math.pi) <= 1e-8


def test_norm_vacuum():
    vac = coherent_state(FockDim(30), CoherentParams(0.0, 0.0))
    assert husimi_norm(husimi_q(vac, VAC_GRID)) == pytest.approx(1.0, abs=1e-3)


def test_norm_displaced_coherent():
    psi = coherent_state(FockDim(100), CoherentParams(3.0, 0.0))
    grid = PhaseGrid(-3.0, 9.0, -6.0, 6.0, 201, 201)
    assert husimi_norm(husimi_q(psi, grid)) == pytest.approx(1.0, abs=1e-3)


def test_norm_half_window_short():
    vac = coherent_state(FockDim(30), CoherentParams(0.0, 0.0))
    half = PhaseGrid(0.0, 6.0, -6.0, 6.0, 101, 201)
    assert husimi_norm(husimi_q(vac, half)) < 0.6


def test_norm_monotone_in_extent():
    vac = coherent_state(FockDim(30), CoherentParams(0.0, 0.0))
    norms = [
        husimi_norm(husimi_q(vac, PhaseGrid(-w, w, -w, w, 101, 101)))
        for w in (1.0, 2.0, 4.0, 6.0)
    ]
    assert all(a < b for a, b in zip(norms, norms[1:]))
    assert norms[-1] == pytest.approx(1.0, abs=1e-3)


def test_centroid_coherent():
    psi = coherent_state(FockDim(120), CoherentParams(3.0, 3.0))
    grid = PhaseGrid(-3.0, 9.0, -3.0, 9.0, 201, 201)
    qbar, pbar = husimi_centroid(husimi_q(psi, grid))
    assert qbar == pytest.approx(3.0, abs=0.02)
    assert pbar == pytest.approx(3.0, abs=0.02)


def test_centroid_grid_too_small():
    psi = coherent_state(FockDim(120), CoherentParams(3.0, 3.0))
    small = PhaseGrid(-1.0, 1.0, -1.0, 1.0, 51, 51)
    with pytest.raises(GridTooSmall):
        husimi_centroid(husimi_q(psi, small))


def test_centroid_tracks_iho_flow(iho_prop):
    # before the correspondence time the packet center follows the
    # classical trajectory of its initial point
    d = FockDim(300)
    psi0 = coherent_state(d, CoherentParams(3.0, 3.0))
    grid = PhaseGrid(-20.0, 20.0, -20.0, 20.0, 201, 201)
    for t in (0.4, 0.9):
        psit = evolve(iho_prop(300), psi0, t)
        qbar, pbar = husimi_centroid(husimi_q(psit, grid))
        expected = 3 * math.exp(t)
        assert abs(qbar - expected) <= 0.05 * expected
        assert abs(pbar - expected) <= 0.05 * expected


def test_centroid_tracks_hiho_flow(hiho_prop):
    d = FockDim(250)
    psi0 = coherent_state(d, CoherentParams(8.0, 9.0))
    grid = PhaseGrid(-15.0, 15.0, -40.0, 40.0, 201, 201)
    sys_h = hiho(3.0, 0.04)
    for t in (0.07, 0.14):
        psit = evolve(hiho_prop(250), psi0, t)
        qbar, pbar = husimi_centroid(husimi_q(psit, grid))
        tr = integrate(sys_h, ClassicalState(8.0, 9.0), t, 1e-4)
        scale = math.hypot(tr.qs[-1], tr.ps[-1])
        assert math.hypot(qbar - tr.qs[-1], pbar - tr.ps[-1]) <= 0.05 * scale


def test_stretch_along_unstable_direction(iho_prop):
    # evolved saddle packet elongates along p = q and contracts along p = -q
    d = FockDim(300)
    vac = coherent_state(d, CoherentParams(0.0, 0.0))
    psit = evolve(iho_prop(300), vac, 1.2)
    grid = PhaseGrid(-20.0, 20.0, -20.0, 20.0, 201, 201)
    mom = husimi_second_moments(husimi_q(psit, grid))
    w, v = np.linalg.eigh(mom)
    major = v[:, 1]  # eigenvector of the larger variance
    diag = np.array([1.0, 1.0]) / np.sqrt(2)
    assert abs(abs(major @ diag) - 1.0) <= 1e-2
    assert w[1] / w[0] > 10


def test_count_local_maxima_synthetic():
    qs = np.linspace(-5, 5, 101)
    g1 = np.exp(-((qs[:, None] + 2) ** 2 + (qs[None, :]) ** 2))
    g2 = np.exp(-((qs[:, None] - 2) ** 2 + (qs[None, :]) ** 2))
    grid = PhaseGrid(-5, 5, -5, 5, 101, 101)
    assert count_local_maxima(HusimiGrid(grid, g1 + g2)) == 2
    assert count_local_maxima(HusimiGrid(grid, g1)) == 1
