"""Direction sweeps over the lower Bloch hemisphere.

Directions ``n`` with ``n3 <= 0`` are labelled by their stereographic image
``P = (n1, n2) / (1 - n3)`` in the closed unit disk. Since ``alpha_min`` is
invariant under ``n -> -n`` the hemisphere covers every direction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .cebound import GaugeModel, minimize_alpha_norm
from .channels import KrausChannel
from .errors import AllInfeasible, OutOfDisk, UpperHemisphere

DEFAULT_RESOLUTION = 201
CI_RESOLUTION = 101
REFINE_ITER = 200
REFINE_XTOL = 1e-6
DISK_TOL = 1e-12

CSV_HEADER = "Px,Py,n1,n2,n3,feasible,alpha_min"


def stereographic(n) -> tuple[float, float]:
    """Map a lower-hemisphere unit vector to the unit disk.

    Raises:
        UpperHemisphere: if ``n3 > 0``; negate the direction first.
    """
    n1, n2, n3 = (float(v) for v in n)
    if n3 > 0:
        raise UpperHemisphere(f"n3 = {n3} > 0; use the antipodal direction")
    return n1 / (1 - n3), n2 / (1 - n3)


def inverse_stereographic(P) -> np.ndarray:
    """Unit vector with ``n3 <= 0`` whose stereographic image is ``P``.

    Raises:
        OutOfDisk: if ``|P| > 1``.
    """
    px, py = (float(v) for v in P)
    r2 = px * px + py * py
    if r2 > (1 + DISK_TOL) ** 2:
        raise OutOfDisk(f"|P| = {math.sqrt(r2)} exceeds 1")
    d = 1 + r2
    # rim points may overshoot |P| = 1 by rounding; keep them on the equator
    return np.array([2 * px / d, 2 * py / d, min((r2 - 1) / d, 0.0)])


def disk_points(resolution: int) -> list[tuple[int, int, float, float]]:
    """In-disk points of a ``resolution x resolution`` grid over ``[-1, 1]^2``.

    Returns ``(ix, iy, Px, Py)`` in row-major order (``Py`` outer, ``Px`` inner).
    """
    if resolution < 3:
        raise ValueError(f"resolution must be at least 3, got {resolution}")
    axis = np.linspace(-1.0, 1.0, resolution)
    out = []
    for iy, py in enumerate(axis):
        for ix, px in enumerate(axis):
            if px * px + py * py <= (1 + DISK_TOL) ** 2:
                out.append((ix, iy, float(px), float(py)))
    return out


def disk_directions(resolution: int) -> list[np.ndarray]:
    return [inverse_stereographic((px, py)) for _, _, px, py in disk_points(resolution)]


@dataclass(frozen=True, eq=False)
class SweepPoint:
    ix: int
    iy: int
    P: tuple[float, float]
    n: tuple[float, float, float]
    feasible: bool
    alpha_min: float | None
    converged: bool = True


@dataclass(frozen=True, eq=False)
class BestPoint:
    """Best direction found: either a grid point or its local refinement."""

    P: tuple[float, float]
    n: tuple[float, float, float]
    alpha_min: float


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Result of a direction sweep.

    ``best`` is the raw grid maximum and ``refined`` the Nelder-Mead polish of
    it (never smaller). Both are ``None`` when no grid point is feasible.
    """

    resolution: int
    points: tuple[SweepPoint, ...]
    best: BestPoint | None
    refined: BestPoint | None

    @property
    def feasible_count(self) -> int:
        return sum(p.feasible for p in self.points)

    @property
    def all_converged(self) -> bool:
        return all(p.converged for p in self.points)

    def values(self) -> np.ndarray:
        return np.array([p.alpha_min for p in self.points if p.feasible])

    def csv_lines(self) -> list[str]:
        lines = [CSV_HEADER]
        for p in self.points:
            cells = [_fmt(v) for v in (*p.P, *p.n)]
            cells.append("true" if p.feasible else "false")
            cells.append(_fmt(p.alpha_min) if p.feasible else "")
            lines.append(",".join(cells))
        return lines

    def to_csv(self) -> str:
        return "\n".join(self.csv_lines()) + "\n"

    def to_pgm(self) -> str:
        """8-bit ASCII greymap; top row is ``Py = 1``, zero outside the disk or where infeasible."""
        res = self.resolution
        img = np.zeros((res, res), dtype=int)
        vals = self.values()
        top = float(vals.max()) if vals.size else 0.0
        for p in self.points:
            if p.feasible and top > 0:
                img[res - 1 - p.iy, p.ix] = int(round(255 * p.alpha_min / top))
        rows = [" ".join(str(v) for v in row) for row in img]
        return "P2\n{0} {0}\n255\n".format(res) + "\n".join(rows) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def thread_count(requested: int | None = None) -> int:
    """Worker count: ``requested``, capped by ``CEQFI_THREADS`` when set."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("CEQFI_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _evaluate(model: GaugeModel, dirs: Sequence[np.ndarray], threads: int) -> list:
    def run(chunk):
        return [minimize_alpha_norm(model, n) for n in chunk]

    if threads <= 1 or len(dirs) < 64:
        return run(dirs)
    size = math.ceil(len(dirs) / threads)
    chunks = [dirs[i : i + size] for i in range(0, len(dirs), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run, chunks))
    return [r for part in parts for r in part]


def _best(points: Iterable[SweepPoint]) -> SweepPoint | None:
    # order-independent: largest value, then lexicographically smallest P
    best = None
    for p in points:
        if not p.feasible:
            continue
        if best is None or p.alpha_min > best.alpha_min or (p.alpha_min == best.alpha_min and p.P < best.P):
            best = p
    return best


def _spherical(n) -> np.ndarray:
    n1, n2, n3 = n
    return np.array([math.acos(max(-1.0, min(1.0, n3))), math.atan2(n2, n1)])


def _from_spherical(t) -> np.ndarray:
    th, ph = t
    return np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])


def refine_direction(model: GaugeModel, start: BestPoint, max_iter: int = REFINE_ITER) -> BestPoint:
    """Nelder-Mead polish of ``alpha_min`` in spherical coordinates, mapped back to ``n3 <= 0``."""

    def objective(t):
        r = minimize_alpha_norm(model, _from_spherical(t))
        return -r.alpha_min if r.feasible else math.inf

    res = minimize(
        objective,
        _spherical(start.n),
        method="Nelder-Mead",
        options={"maxiter": max_iter, "xatol": REFINE_XTOL, "fatol": 1e-12},
    )
    if not np.isfinite(res.fun) or -res.fun <= start.alpha_min:
        return start
    n = _from_spherical(res.x)
    if n[2] > 0:
        n = -n
    return BestPoint(stereographic(n), tuple(float(v) for v in n), float(-res.fun))


def sweep_directions(
    c: KrausChannel | GaugeModel,
    resolution: int = DEFAULT_RESOLUTION,
    *,
    refine: bool = True,
    threads: int | None = None,
) -> SweepGrid:
    """Evaluate ``alpha_min`` on the stereographic disk grid and refine the best point."""
    model = c if isinstance(c, GaugeModel) else GaugeModel(c)
    pts = disk_points(resolution)
    dirs = [inverse_stereographic((px, py)) for _, _, px, py in pts]
    results = _evaluate(model, dirs, thread_count(threads))
    points = tuple(
        SweepPoint(ix, iy, (px, py), tuple(float(v) for v in n), r.feasible, r.alpha_min, r.converged)
        for (ix, iy, px, py), n, r in zip(pts, dirs, results)
    )
    top = _best(points)
    best = None if top is None else BestPoint(top.P, top.n, top.alpha_min)
    refined = None
    if best is not None:
        refined = refine_direction(model, best) if refine else best
    return SweepGrid(resolution, points, best, refined)


def neff_bound(c: KrausChannel | GaugeModel, grid: SweepGrid) -> float:
    """Largest ``alpha_min`` over feasible directions, after refinement.

    Raises:
        AllInfeasible: if no grid direction admits ``beta = 0``.
    """
    if grid.best is None:
        raise AllInfeasible("beta = 0 is infeasible at every grid direction; no linear bound")
    if grid.refined is not None:
        return grid.refined.alpha_min
    model = c if isinstance(c, GaugeModel) else GaugeModel(c)
    return refine_direction(model, grid.best).alpha_min
