"""Plot-ready tables: variance traces, squeezing maps, noise curves, eta sweeps.

Every writer emits a provenance comment line followed by a CSV header, and
formats floats with ``repr`` so that identical inputs give byte-identical
files.
"""

from __future__ import annotations

import csv
import io
import math
import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import contourpy
import numpy as np
import scipy
from scipy.optimize import brentq

from . import __version__
from .analytic import Parity, cat_decomposition, cat_variance, ensemble_noise, variance_closed_form
from .fock import Quadrature, auto_dim, label_to_alpha, quadrature_pdf
from .keyrate import N0, i_ab_bound, i_ae_bound, secure_rate_background

FIGURE_IDS = ("variance-evolution", "cat-squeezing-contour", "ensemble-noise", "cat-distribution")
CONTOUR_LEVELS = (0.5, 0.4)


@dataclass(frozen=True)
class Table:
    name: str
    header: tuple[str, ...]
    rows: np.ndarray  # (n, len(header)); object dtype allowed for mixed columns

    def to_csv(self, provenance: str) -> str:
        buf = io.StringIO()
        buf.write(f"# {provenance}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def write(self, out_dir: str | Path, provenance: str) -> Path:
        path = Path(out_dir) / f"{self.name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(provenance))
        return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def provenance(config_digest: str = "-", seed: int | str = "-") -> str:
    return (f"squidqkd {__version__}; config {config_digest}; seed {seed}; "
            f"numpy {np.__version__}; scipy {scipy.__version__}; "
            f"contourpy {contourpy.__version__}; python {platform.python_version()}")


# --------------------------------------------------------------------------
# Figure tables
# --------------------------------------------------------------------------

def variance_evolution(Omega: float = 5.0, nu: float = 1.0, phi: float = 0.3, v: float = 0.3,
                       n_points: int = 2001) -> Table:
    t = np.linspace(0.0, 2.0 * math.pi / nu, n_points)
    alpha = label_to_alpha(phi, v)
    vp = variance_closed_form(alpha, Omega, nu, t, Quadrature.PHI)
    vv = variance_closed_form(alpha, Omega, nu, t, Quadrature.V)
    return Table("variance-evolution", ("t", "var_phi", "var_v", "product"),
                 np.column_stack([t, vp, vv, vp * vv]))


def squeezing_grid(lo: float = -2.0, hi: float = 2.0, n: int = 201,
                   parity: Parity = Parity.EVEN):
    axis = np.linspace(lo, hi, n)
    phi, v = np.meshgrid(axis, axis, indexing="xy")
    return axis, cat_variance(phi, v, parity, Quadrature.PHI), cat_variance(phi, v, parity, Quadrature.V)


def contour_data(lo: float = -2.0, hi: float = 2.0, n: int = 201,
                 parity: Parity = Parity.EVEN,
                 levels: Sequence[float] = CONTOUR_LEVELS) -> tuple[Table, Table]:
    """Cat-state variance surfaces and their level-set polylines.

    Returns ``(grid, lines)``. ``grid`` has one row per ``(phi, v)`` node;
    ``lines`` lists polyline vertices tagged by quadrature, level and a
    running line id.
    """
    axis, sp, sv = squeezing_grid(lo, hi, n, parity)
    phi, v = np.meshgrid(axis, axis, indexing="xy")
    grid = Table(f"contour-{Parity(parity).value}-grid", ("phi", "v", "var_phi", "var_v"),
                 np.column_stack([phi.ravel(), v.ravel(), sp.ravel(), sv.ravel()]))
    rows = []
    line_id = 0
    for qname, z in (("Phi", sp), ("V", sv)):
        gen = contourpy.contour_generator(axis, axis, z, line_type=contourpy.LineType.Separate)
        for level in levels:
            for seg in gen.lines(level):
                for x, y in seg:
                    rows.append((qname, float(level), line_id, float(x), float(y)))
                line_id += 1
    lines = Table(f"contour-{Parity(parity).value}-lines",
                  ("quadrature", "level", "line", "phi", "v"),
                  np.array(rows, dtype=object).reshape(-1, 5))
    return grid, lines


def ensemble_noise_curve(Omega: float, nu: float = 1.0, n_points: int = 2001) -> Table:
    t = np.linspace(0.0, 2.0 * math.pi / nu, n_points)
    ratio = Omega / nu
    tag = f"{ratio:g}".replace(".", "p")
    return Table(f"ensemble-noise-ratio{tag}", ("t", "C_AB"),
                 np.column_stack([t, ensemble_noise(Omega, nu, t)]))


def cat_distribution(phi: float = 4.0, v: float = 4.0, ratio: float = 100.0,
                     n_points: int = 2001, half_width: float = 10.0) -> Table:
    """Quadrature densities of the two-component cat at ``t = pi/(2 nu)``.

    Columns also give the density of the folded outcome ``|x|``.
    """
    alpha = label_to_alpha(phi, v)
    cat = cat_decomposition(1, 2, ratio, alpha).to_fock(auto_dim(alpha))
    x = np.linspace(-half_width, half_width, n_points)
    pp = quadrature_pdf(cat, Quadrature.PHI, x)
    pv = quadrature_pdf(cat, Quadrature.V, x)
    fp = np.where(x >= 0, pp + pp[::-1], 0.0)
    fv = np.where(x >= 0, pv + pv[::-1], 0.0)
    return Table("cat-distribution", ("x", "p_phi", "p_v", "p_abs_phi", "p_abs_v"),
                 np.column_stack([x, pp, pv, fp, fv]))


def figure_tables(fig_id: str) -> list[Table]:
    if fig_id == "variance-evolution":
        return [variance_evolution()]
    if fig_id == "cat-squeezing-contour":
        out = []
        for parity in Parity:
            out.extend(contour_data(parity=parity))
        return out
    if fig_id == "ensemble-noise":
        return [ensemble_noise_curve(5.0), ensemble_noise_curve(6.0)]
    if fig_id == "cat-distribution":
        return [cat_distribution()]
    raise ValueError(f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURE_IDS)}")


# --------------------------------------------------------------------------
# Security sweep
# --------------------------------------------------------------------------

SWEEP_VARIANTS = ("background", "time-stamped", "arbitrary-time")


def _rates(eta: float, variant: str, V_A: float, c_ab_T: float | None, c_ae_T: float):
    chi = (1.0 - eta) / eta
    if variant == "background":
        V = V_A + 1.0
        i_ab = 0.5 * math.log2((V + chi) / (1.0 + chi))
        i_ae = i_ab - secure_rate_background(V, chi)
    else:
        if c_ab_T is None:
            c_ab_T = N0 if variant == "time-stamped" else 1.5
        i_ab = i_ab_bound(V_A, chi, c_ab_T)
        i_ae = i_ae_bound(V_A, chi, c_ae_T)
    return chi, i_ab, i_ae


def sweep_eta(etas: Iterable[float], *, variant: str = "background", V_A: float = 1.0,
              c_ab_T: float | None = None, c_ae_T: float = N0) -> tuple[Table, float | None]:
    """Rates over a transmittance grid and the ``delta_i = 0`` crossing.

    ``background`` is the plain coherent-state rate with ``V = V_A + 1``;
    ``time-stamped`` uses Bob noise ``N0``; ``arbitrary-time`` uses the
    time-averaged ``3/2`` unless ``c_ab_T`` is given.
    """
    if variant not in SWEEP_VARIANTS:
        raise ValueError(f"variant must be one of {SWEEP_VARIANTS}")
    etas = np.asarray(list(etas), dtype=np.float64)
    if etas.size == 0 or np.any(etas <= 0) or np.any(etas > 1):
        raise ValueError("eta grid must lie in (0, 1]")
    rows = []
    for eta in etas:
        chi, i_ab, i_ae = _rates(float(eta), variant, V_A, c_ab_T, c_ae_T)
        d = i_ab - i_ae
        rows.append((float(eta), chi, i_ab, i_ae, d, bool(chi < 1.0 and d > 0)))
    table = Table(f"sweep-eta-{variant}", ("eta", "chi", "i_ab", "i_ae", "delta_i", "secure"),
                  np.array(rows, dtype=object))

    def delta(eta):
        _, a, e = _rates(eta, variant, V_A, c_ab_T, c_ae_T)
        return a - e

    lo, hi = 1e-6, 1.0 - 1e-12
    crossing = None
    if delta(lo) * delta(hi) < 0:
        crossing = float(brentq(delta, lo, hi, xtol=1e-14, rtol=1e-14))
    return table, crossing
