"""Uniform-grid kernels shared by the analytic delay chain.

Distributions live on a grid t_k = k*h, k = 0..n-1, as either a density
(``kind="pdf"``) or a cumulative distribution (``kind="cdf"``).  Convolutions
use the trapezoid rule with Gregory end corrections, so pdf*pdf gives a pdf
and pdf*cdf gives the cdf of the sum.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, signal

Kind = Literal["pdf", "cdf"]


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    h: float
    n_points: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step must be positive")
        if self.n_points < 2:
            raise ValueError("grid needs at least 2 points")

    @classmethod
    def covering(cls, horizon: float, n_points: int) -> "Grid":
        return cls(h=horizon / (n_points - 1), n_points=n_points)

    @property
    def t(self) -> np.ndarray:
        return self.h * np.arange(self.n_points)

    @property
    def horizon(self) -> float:
        return self.h * (self.n_points - 1)

    def refined(self, factor: int = 2) -> "Grid":
        """Same horizon, step divided by ``factor``."""
        return Grid(h=self.h / factor, n_points=(self.n_points - 1) * factor + 1)

    def same_as(self, other: "Grid") -> bool:
        return self.n_points == other.n_points and np.isclose(self.h, other.h, rtol=1e-12, atol=0.0)


@dataclass
class TabulatedDist:
    grid: Grid
    values: np.ndarray
    kind: Kind
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got {self.values.shape}")
        if self.kind not in ("pdf", "cdf"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def mass(self) -> float:
        """Total probability captured on the grid."""
        if self.kind == "pdf":
            return quadrature(self.values, self.grid.h)
        return float(self.values[-1])

    def to_cdf(self) -> "TabulatedDist":
        if self.kind == "cdf":
            return self
        cdf = integrate.cumulative_trapezoid(self.values, dx=self.grid.h, initial=0.0)
        return TabulatedDist(self.grid, cdf, "cdf", self.name, dict(self.meta))

    def mean(self) -> float:
        """First moment of the (possibly defective) distribution on the grid."""
        if self.kind == "pdf":
            return quadrature(self.t * self.values, self.grid.h)
        # E[X] = int (F(inf) - F(t)) dt for the captured mass
        return quadrature(self.values[-1] - self.values, self.grid.h)

    def __call__(self, t):
        """Linear interpolation; beyond the horizon the last value is held."""
        return interpolate(self, t)

    def to_csv(self, path=None, header: dict | None = None) -> str:
        """Two-column CSV (t, value) preceded by a '#' provenance block."""
        buf = io.StringIO()
        info = {"distribution": self.name or "unnamed", "kind": self.kind,
                "h": repr(self.grid.h), "n_points": self.grid.n_points}
        info.update(self.meta)
        info.update(header or {})
        for k, v in info.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", self.name or self.kind])
        for t, v in zip(self.t, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text: str) -> "TabulatedDist":
        if "\n" in path_or_text:
            text = path_or_text
        else:
            with open(path_or_text) as fh:
                text = fh.read()
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif line.strip():
                rows.append(line.split(","))
        header, data = rows[0], np.array(rows[1:], dtype=float)
        h = float(meta.pop("h"))
        n = int(meta.pop("n_points"))
        kind = meta.pop("kind")
        name = meta.pop("distribution", header[1])
        return cls(Grid(h, n), data[:, 1], kind, name, meta)


def unit_step(grid: Grid) -> TabulatedDist:
    """CDF of the point mass at zero."""
    return TabulatedDist(grid, np.ones(grid.n_points), "cdf", "step")


def quadrature(values, h: float) -> float:
    """Trapezoid rule on a uniform grid."""
    return float(integrate.trapezoid(values, dx=h))


def _check_grids(a: TabulatedDist, b: TabulatedDist):
    if not a.grid.same_as(b.grid):
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


# Gregory end corrections (w_j - 1 for the first three nodes); with them the
# rectangle sum is exact for cubics, error O(h^4) for smooth integrands.
_GREGORY = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0]) - 1.0
_GREGORY_MIN = 6


def _trapezoid_convolution(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    """c_k = h * sum_j w_j a_j b_{k-j} with end-corrected trapezoid weights."""
    n = len(a)
    full = signal.convolve(a, b, mode="full", method="auto")[:n]
    # plain trapezoid everywhere first
    out = full - 0.5 * a[0] * b - 0.5 * a * b[0]
    k = np.arange(n)
    big = k >= _GREGORY_MIN - 1
    corr = np.zeros(n)
    for i, w in enumerate(_GREGORY):
        extra = w + (0.5 if i == 0 else 0.0)  # undo the trapezoid half-weight at the ends
        lo = np.zeros(n)
        lo[i:] = a[i] * b[: n - i]            # node j = i, partner b_{k-i}
        hi = np.zeros(n)
        hi[i:] = a[: n - i] * b[i]            # node j = k - i, partner b_i
        corr += extra * (lo + hi)
    out[big] += corr[big]
    # Newton-Cotes on the first few nodes, where the Gregory stencil does not fit
    for kk, w in _SHORT_RULES.items():
        if kk < n:
            out[kk] = np.dot(w, a[: kk + 1] * b[kk::-1])
    return h * out


_SHORT_RULES = {
    2: np.array([1.0, 4.0, 1.0]) / 3.0,
    3: np.array([3.0, 9.0, 9.0, 3.0]) / 8.0,
    4: np.array([14.0, 64.0, 24.0, 64.0, 14.0]) / 45.0,
}


def convolve(a: TabulatedDist, b: TabulatedDist) -> TabulatedDist:
    """Distribution of the sum of independent variables with laws ``a`` and ``b``.

    pdf*pdf -> pdf, pdf*cdf (either order) -> cdf.  Mass that would land
    beyond the horizon is dropped; ``meta["tail_mass"]`` reports how much.
    """
    _check_grids(a, b)
    if a.kind == "cdf" and b.kind == "cdf":
        raise ValueError("cdf*cdf is not a distribution of a sum; pass one side as a pdf")
    if a.kind == "cdf":
        a, b = b, a
    out = _trapezoid_convolution(a.values, b.values, a.grid.h)
    kind: Kind = "pdf" if b.kind == "pdf" else "cdf"
    if kind == "cdf":
        out = np.maximum.accumulate(np.clip(out, 0.0, None))
    else:
        out = np.clip(out, 0.0, None)
    res = TabulatedDist(a.grid, out, kind, f"({a.name}*{b.name})")
    res.meta["tail_mass"] = max(a.mass() * b.mass() - res.mass(), 0.0)
    return res


def nfold(dist: TabulatedDist, n: int) -> TabulatedDist:
    """CDF of the sum of ``n`` iid copies; n = 0 gives the unit step.

    A cdf input is differentiated to a density first; pass the pdf when it is
    known in closed form.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    cdf = unit_step(dist.grid)
    if n == 0:
        return cdf
    if dist.kind == "cdf" and n == 1:
        return TabulatedDist(dist.grid, dist.values.copy(), "cdf", dist.name)
    pdf = dist if dist.kind == "pdf" else cdf_to_pdf(dist)
    for _ in range(n):
        cdf = convolve(pdf, cdf)
    cdf.name = f"{dist.name}^({n})"
    return cdf


def nfold_series(pdf: TabulatedDist, weights) -> TabulatedDist:
    """sum_n weights[n] * (n-fold CDF) computed with one convolution per term."""
    grid = pdf.grid
    term = unit_step(grid)
    acc = weights[0] * term.values
    for w in weights[1:]:
        term = convolve(pdf, term)
        acc = acc + w * term.values
    return TabulatedDist(grid, acc, "cdf")


def cdf_to_pdf(cdf: TabulatedDist) -> TabulatedDist:
    """Density from a tabulated CDF by second-order finite differences."""
    d = np.gradient(cdf.values, cdf.grid.h)
    return TabulatedDist(cdf.grid, np.clip(d, 0.0, None), "pdf", cdf.name)


def interpolate(dist: TabulatedDist, t):
    t = np.asarray(t, dtype=float)
    out = np.interp(t, dist.t, dist.values, left=dist.values[0] if dist.kind == "pdf" else 0.0,
                    right=dist.values[-1] if dist.kind == "cdf" else 0.0)
    return out.item() if out.ndim == 0 else out


def ks_distance(a: TabulatedDist, b: TabulatedDist) -> float:
    """Sup-norm distance between the two CDFs at the grid points."""
    _check_grids(a, b)
    return float(np.max(np.abs(a.to_cdf().values - b.to_cdf().values)))


def l1_distance(a: TabulatedDist, b: TabulatedDist) -> float:
    """Grid L1 distance h * sum |a - b| between two densities."""
    _check_grids(a, b)
    if a.kind != "pdf" or b.kind != "pdf":
        raise ValueError("l1_distance compares densities")
    return float(a.grid.h * np.sum(np.abs(a.values - b.values)))


def ks_against_samples(cdf: TabulatedDist, samples) -> float:
    """Exact KS statistic of an empirical sample against a tabulated CDF.

    The tabulated CDF is linearly interpolated.  Right and left limits are
    compared at each distinct sample value, so tied samples and an atom at
    t = 0 (e.g. the no-wait probability of a queue) are handled; for
    continuous laws this is the classical statistic.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    ux, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / n
    left = right - counts / n
    F = interpolate(cdf.to_cdf(), ux)
    F_left = np.where(ux <= 0.0, 0.0, F)
    return float(max(np.abs(F - right).max(), np.abs(F_left - left).max()))
