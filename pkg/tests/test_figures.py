import math

import numpy as np
import pytest

from squidqkd.analytic import Parity
from squidqkd.figures import (FIGURE_IDS, SWEEP_VARIANTS, cat_distribution, contour_data,
                              ensemble_noise_curve, figure_tables, provenance, sweep_eta,
                              variance_evolution)

ETAS = np.linspace(0.05, 1.0, 96)


@pytest.mark.parametrize("variant", ["background", "time-stamped"])
def test_sweep_crossing_at_half(variant):
    table, crossing = sweep_eta(ETAS, variant=variant)
    assert crossing == pytest.approx(0.5, abs=1e-9)
    for eta, chi, _, _, d, secure in table.rows:
        if eta > 0.5 + 1e-12:
            assert d > 0 and secure
        if eta < 0.5 - 1e-12:
            assert not secure


def test_sweep_arbitrary_time_crossing():
    _, crossing = sweep_eta(ETAS, variant="arbitrary-time")
    assert crossing == pytest.approx(1 / math.sqrt(2), abs=1e-9)


def test_sweep_rows():
    table, _ = sweep_eta([0.25, 1.0], variant="time-stamped")
    (e1, chi1, _, _, d1, s1), (e2, chi2, i_ab, i_ae, d2, s2) = table.rows
    assert chi1 == pytest.approx(3.0) and not s1 and d1 < 0
    assert chi2 == 0.0 and s2 and i_ae == 0.0 and d2 == pytest.approx(0.5, abs=1e-12)


def test_sweep_rejects_bad_input():
    with pytest.raises(ValueError):
        sweep_eta([0.0, 0.5])
    with pytest.raises(ValueError):
        sweep_eta([0.5], variant="nope")
    assert len(SWEEP_VARIANTS) == 3


def test_contour_grid_values():
    grid, lines = contour_data(n=101)
    phi, v, vp, vv = (grid.rows[:, i] for i in range(4))
    origin = np.argmin(phi ** 2 + v ** 2)
    assert vp[origin] == 0.5 and vv[origin] == 0.5
    far = phi ** 2 + v ** 2 > 4.5
    assert np.all(vp[far] >= 0.5 - 1e-12) and np.all(vv[far] >= 0.5 - 1e-12)
    assert vp.min() < 0.4
    assert set(lines.rows[:, 1]) == {0.5, 0.4}
    assert set(lines.rows[:, 0]) == {"Phi", "V"}


def test_contour_parity_swaps_quadratures():
    even, _ = contour_data(n=41, parity=Parity.EVEN)
    odd, _ = contour_data(n=41, parity=Parity.ODD)
    assert np.array_equal(even.rows[:, 2], odd.rows[:, 3])
    assert np.array_equal(even.rows[:, 3], odd.rows[:, 2])


def test_contour_lines_lie_on_level():
    from squidqkd.analytic import cat_variance
    from squidqkd.fock import Quadrature
    _, lines = contour_data(n=201)
    for q, level, _, x, y in lines.rows[::25]:
        got = cat_variance(float(x), float(y), Parity.EVEN, Quadrature[q.upper()])
        assert got == pytest.approx(level, abs=2e-3)


def test_variance_evolution_shape():
    t = variance_evolution(n_points=401)
    assert t.header == ("t", "var_phi", "var_v", "product")
    assert t.rows.shape == (401, 4)
    assert t.rows[0, 1] == pytest.approx(0.5) and t.rows[-1, 1] == pytest.approx(0.5)
    assert t.rows[:, 3].min() >= 0.25 - 1e-9


def test_ensemble_noise_curves():
    even = ensemble_noise_curve(6.0, n_points=2001)
    odd = ensemble_noise_curve(5.0, n_points=2001)
    assert even.name == "ensemble-noise-ratio6" and odd.name == "ensemble-noise-ratio5"
    mid = 1000
    assert even.rows[mid, 1] == pytest.approx(2.5, abs=1e-9)
    assert odd.rows[0, 1] == pytest.approx(0.5)


def test_cat_distribution_normalised():
    t = cat_distribution(n_points=4001)
    x = t.rows[:, 0]
    for col in (1, 2):
        assert np.trapezoid(t.rows[:, col], x) == pytest.approx(1.0, abs=1e-6)
    pos = x >= 0
    assert np.trapezoid(t.rows[pos, 3], x[pos]) == pytest.approx(1.0, abs=1e-3)


def test_csv_is_byte_reproducible(tmp_path):
    prov = provenance("abc", 7)
    a = variance_evolution(n_points=101).write(tmp_path / "a", prov).read_bytes()
    b = variance_evolution(n_points=101).write(tmp_path / "b", prov).read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0].startswith("# squidqkd") and "seed 7" in lines[0] and "config abc" in lines[0]
    assert lines[1] == "t,var_phi,var_v,product"
    assert float(lines[2].split(",")[1]) == 0.5


def test_figure_ids():
    for fid in FIGURE_IDS:
        assert figure_tables(fid)
    with pytest.raises(ValueError):
        figure_tables("fig-99")
