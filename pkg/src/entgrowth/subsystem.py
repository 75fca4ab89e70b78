"""Subsystem volume-growth exponents.

The exponent of a subsystem is the asymptotic growth rate of the log
volume of any spanning parallelepiped of its dual space pushed forward by
M(t)^T.  It is computed two independent ways:

* algebraically, by expressing a Darboux row set of the subsystem in the
  Lyapunov basis, greedily selecting the first 2 N_A independent columns
  of that coefficient matrix, and summing the matching exponents;
* volumetrically, as the fitted slope of the restricted log-determinant
  0.5 ln det(F M(t) G0 M(t)^T F^T) over the second half of the horizon.

The volumetric slope is independent of the reference metric G0, which the
cross-method tests exercise directly.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import PropagationResult, QuadraticHamiltonian, propagate
from .entropy import logdet_pd
from .errors import DimensionMismatch, NotConverged, NotDarboux, RankDeficient
from .fitting import SlopeFit, fit_slope, windowed
from .lyapunov import LyapunovData
from .phase_space import FORM_TOL, SubsystemSpec, _maxabs, standard_omega


@dataclass(frozen=True)
class ExponentReport:
    """Subsystem exponent with selection diagnostics.

    ``indices`` maps selection rank to Lyapunov index (0-based, strictly
    increasing); ``margins`` holds each column's independence margin from
    the greedy scan.  For the volumetric method ``stderr`` and ``window``
    describe the slope fit instead.
    """

    lambda_a: float
    method: str
    indices: Optional[tuple] = None
    margins: Optional[np.ndarray] = None
    generic_lambda: Optional[float] = None
    generic_agrees: Optional[bool] = None
    stderr: Optional[float] = None
    window: Optional[tuple] = None


def darboux_rows(sub: SubsystemSpec) -> np.ndarray:
    """Row set spanning the subsystem dual space, checked against the form."""
    theta = np.asarray(sub.selector, dtype=float)
    omega_full = standard_omega(theta.shape[1] // 2)
    omega_sub = standard_omega(theta.shape[0] // 2)
    defect = _maxabs(theta @ omega_full @ theta.T - omega_sub)
    if defect > FORM_TOL * (1.0 + _maxabs(theta) ** 2):
        raise NotDarboux(f"rows do not form a Darboux set (defect {defect:.3g})")
    return theta


def expansion_matrix(theta, lyap: LyapunovData) -> np.ndarray:
    """Coefficients of the subsystem rows in the (orthonormal) Lyapunov basis."""
    theta = np.asarray(theta, dtype=float)
    basis = lyap.basis
    if theta.shape[1] != basis.shape[1]:
        raise DimensionMismatch(f"rows have {theta.shape[1]} components, basis {basis.shape[1]}")
    return theta @ basis.T


def select_columns(f, tol_rel: float = 1e-8):
    """Greedy left-to-right selection of the first independent columns.

    Column j is selected iff its residual after orthogonal projection onto
    the span of previously selected columns exceeds ``tol_rel`` times its
    norm.  Returns ``(indices, margins)`` with one margin per column; the
    scan stops once 2 N_A columns are selected.  Within a degenerate
    exponent cluster individual column identities are arbitrary but the
    selected count per cluster span is not.
    """
    f = np.asarray(f, dtype=float)
    need = f.shape[0]
    selected = []
    basis = np.zeros((need, 0))
    margins = np.zeros(f.shape[1])
    norms = np.linalg.norm(f, axis=0)
    # columns below the matrix scale are roundoff zeros; without this floor
    # the norm-relative margin of a zero column would be 1
    floor = tol_rel * (np.max(norms) if np.max(norms) > 0 else 1.0)
    for j in range(f.shape[1]):
        col = f[:, j]
        if norms[j] <= floor:
            margins[j] = 0.0
            continue
        resid = col - basis @ (basis.T @ col)
        margins[j] = np.linalg.norm(resid) / norms[j]
        if len(selected) < need and margins[j] > tol_rel:
            selected.append(j)
            basis = np.column_stack([basis, resid / np.linalg.norm(resid)])
    if len(selected) < need:
        raise RankDeficient(
            f"only {len(selected)} independent columns of {need} required at tol {tol_rel:g}",
            margins=margins)
    return selected, margins


def subsystem_exponent_algebraic(sub: SubsystemSpec, lyap: LyapunovData,
                                 tol_rel: float = 1e-8) -> ExponentReport:
    """Exponent as the sum of selected Lyapunov exponents.

    Also evaluates the generic shortcut (sum of the largest 2 N_A
    exponents) and records whether the two agree.
    """
    theta = darboux_rows(sub)
    f = expansion_matrix(theta, lyap)
    indices, margins = select_columns(f, tol_rel=tol_rel)
    lam = lyap.exponents
    value = float(np.sum(lam[list(indices)]))
    generic = float(np.sum(lam[:len(indices)]))
    agrees = bool(abs(value - generic) <= max(1e-9, 2.0 * lyap.residual))
    return ExponentReport(lambda_a=value, method="algebraic", indices=tuple(indices),
                          margins=margins, generic_lambda=generic, generic_agrees=agrees)


def restricted_log_volume(sub: SubsystemSpec, m, g0) -> float:
    """0.5 ln det of the subsystem block of M G0 M^T.

    Equals the log metric volume (w.r.t. G0) of the pushed-forward unit
    parallelepiped spanning the subsystem dual space.
    """
    f = sub.selector @ np.asarray(m, dtype=float)
    block = f @ np.asarray(g0, dtype=float) @ f.T
    return 0.5 * logdet_pd(0.5 * (block + block.T))


def subsystem_exponent_volumetric(sub: SubsystemSpec, ham: Optional[QuadraticHamiltonian] = None,
                                  t_star: float = None, dt: float = None, g0=None,
                                  series: Optional[PropagationResult] = None,
                                  window: Optional[tuple] = None,
                                  min_points: int = 8) -> ExponentReport:
    """Exponent as the slope of the restricted log volume over [t*/2, t*].

    Either pass a cached ``series`` or a Hamiltonian with ``t_star``/``dt``
    to propagate here.  The first half of the horizon is discarded as
    transient.  For periodically driven systems sample at multiples of the
    drive period (choose ``store_every`` accordingly) so that bounded
    Floquet oscillations do not bias the fit.
    """
    if series is None:
        if ham is None or t_star is None or dt is None:
            raise ValueError("need either a series or (ham, t_star, dt)")
        stride = max(1, int(round(t_star / dt / 200)))
        series = propagate(ham, t_star, dt, store_every=stride)
    if g0 is None:
        g0 = np.eye(series.matrices.shape[1])
    t_end = series.t_final
    lo, hi = window if window is not None else (0.5 * t_end, t_end)
    values = np.array([restricted_log_volume(sub, m, g0) for m in series.matrices])
    t_w, v_w = windowed(series.times, values, lo, hi)
    if len(t_w) < min_points:
        raise NotConverged(f"only {len(t_w)} samples in fit window [{lo:.3g}, {hi:.3g}]")
    fit = fit_slope(t_w, v_w)
    return ExponentReport(lambda_a=fit.slope, method="volumetric",
                          stderr=fit.stderr, window=fit.window)


def volumetric_slope_fit(sub: SubsystemSpec, series: PropagationResult, g0,
                         window: Optional[tuple] = None) -> SlopeFit:
    """Raw slope fit of the restricted log volume (full fit record)."""
    t_end = series.t_final
    lo, hi = window if window is not None else (0.5 * t_end, t_end)
    values = np.array([restricted_log_volume(sub, m, g0) for m in series.matrices])
    t_w, v_w = windowed(series.times, values, lo, hi)
    return fit_slope(t_w, v_w)
