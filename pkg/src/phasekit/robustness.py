"""Scalar robustness measures and parameter rankings.

Each sensitivity object collapses to a scalar: R_omega = |S_omega| and
R_chi = |S_chi*| for the scalar characteristics, and the L2 norm

    R_q = sqrt( integral over the circle of Z_q(theta)^2 dtheta )

for the iPRC curve (trapezoid rule on the uniform grid, spectrally accurate
for periodic integrands). Columns normalized by their max-norm land in
[0, 1] and rank parameters by relative influence; note the normalized period
column always equals the normalized frequency column.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AlignmentError, DegenerateNormalizationError
from .fourier import periodic_integral
from .sensitivity import SensitivityBundle


@dataclass(frozen=True)
class RobustnessRow:
    """Raw and normalized measures for one parameter."""

    name: str
    group: str
    r_omega: float
    r_period: float
    r_q: float
    r_chi: float
    s_chi: float
    s_chi_omega: float
    s_chi_gamma: float
    rbar_omega: float = np.nan
    rbar_period: float = np.nan
    rbar_q: float = np.nan
    rbar_chi: float = np.nan
    sbar_chi: float = np.nan
    sbar_chi_omega: float = np.nan
    sbar_chi_gamma: float = np.nan


@dataclass(frozen=True, eq=False)
class RobustnessReport:
    rows: tuple[RobustnessRow, ...]
    relative: bool
    normalized: bool = False

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.rows])


def dominant_characteristic(rbar_omega: float, rbar_q: float) -> str:
    """Scatter-plot classification: below the bisector = period-dominant."""
    return "period" if rbar_omega > rbar_q else "prc"


def measure(bundles: list[SensitivityBundle],
            locking_sens: dict[str, tuple[float, float, float]],
            groups: dict[str, str] | None = None) -> RobustnessReport:
    """Collapse sensitivity bundles + locking sensitivities to scalar rows.

    ``locking_sens`` maps parameter name to (S_chi, S_chi|omega, S_chi|Gamma)
    with the same relative/absolute convention as the bundles.
    """
    if not bundles:
        raise ValueError("no sensitivity bundles given")
    grid = bundles[0].grid_size
    relative = bundles[0].relative
    groups = groups or {}
    rows = []
    for b in bundles:
        if b.grid_size != grid:
            raise AlignmentError(
                f"bundle {b.name!r} lives on a {b.grid_size}-point grid, "
                f"expected {grid}")
        if b.relative != relative:
            raise AlignmentError("mixed relative/absolute bundles")
        s_chi, s_w, s_g = locking_sens[b.name]
        r_q = float(np.sqrt(periodic_integral(b.z_q ** 2)))
        rows.append(RobustnessRow(
            name=b.name, group=groups.get(b.name, ""),
            r_omega=abs(b.s_omega), r_period=abs(b.s_period), r_q=r_q,
            r_chi=abs(s_chi), s_chi=s_chi, s_chi_omega=s_w, s_chi_gamma=s_g))
    return RobustnessReport(rows=tuple(rows), relative=relative)


def normalize(report: RobustnessReport) -> RobustnessReport:
    """Divide each measure column by its max; error on an all-zero column."""
    def scale(attr):
        col = report.column(attr)
        top = float(np.max(np.abs(col)))
        if top == 0.0:
            raise DegenerateNormalizationError(
                f"column {attr!r} is identically zero; nothing to normalize")
        return top

    m_omega = scale("r_omega")
    m_period = scale("r_period")
    m_q = scale("r_q")
    m_chi = scale("r_chi")
    # bar-plot normalization: everything over the max |S_chi| so the two
    # contributions still sum to the normalized total
    rows = tuple(replace(
        r,
        rbar_omega=r.r_omega / m_omega,
        rbar_period=r.r_period / m_period,
        rbar_q=r.r_q / m_q,
        rbar_chi=r.r_chi / m_chi,
        sbar_chi=r.s_chi / m_chi,
        sbar_chi_omega=r.s_chi_omega / m_chi,
        sbar_chi_gamma=r.s_chi_gamma / m_chi,
    ) for r in report.rows)
    return RobustnessReport(rows=rows, relative=report.relative, normalized=True)


def rank_and_partition(report: RobustnessReport, threshold: float = 0.1
                       ) -> tuple[tuple[RobustnessRow, ...], tuple[RobustnessRow, ...]]:
    """Rows by decreasing |normalized entrainment sensitivity|, plus the
    above-threshold subset (ties broken by parameter name)."""
    if not report.normalized:
        raise ValueError("rank_and_partition needs a normalized report")
    ordered = tuple(sorted(report.rows,
                           key=lambda r: (-abs(r.rbar_chi), r.name)))
    subset = tuple(r for r in ordered if abs(r.rbar_chi) > threshold)
    return ordered, subset
