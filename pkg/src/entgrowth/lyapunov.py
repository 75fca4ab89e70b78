"""Finite-horizon Lyapunov spectra, bases, and regularity diagnostics.

The limiting matrix ln(M M^T) / (2t) is estimated two ways:

* ``svd``: one SVD of M(t*).  Simple and accurate, but contracting
  directions are lost to roundoff once lambda_1 * t exceeds about 30
  (smallest resolvable singular value is ~ eps * sigma_max).
* ``qr``: re-orthonormalized push-forward accumulating ln diag(R), the
  standard long-horizon method; resolves the full spectrum at any horizon.

Both report a convergence residual from halving the horizon.  Since the
leading finite-horizon error decays like 1/t, the two-horizon data also
yields a Richardson-refined estimate 2 L(t*) - L(t*/2), which is what the
``exponents`` field carries by default (raw values are kept alongside).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .dynamics import PropagationResult, QuadraticHamiltonian, generator, polar_decompose, propagate
from .errors import NotConverged, SingularM
from .phase_space import _maxabs

# SVD of M(t) resolves the full spectrum only while the spread
# (lambda_1 - lambda_min) t stays below -ln(eps) ~ 36; regular spectra have
# lambda_min = -lambda_1, so the dispatch threshold is on 2 lambda_1 t
_SVD_RANGE = 15.0


@dataclass(frozen=True)
class LyapunovData:
    """Sorted exponents with orthonormal basis rows and convergence data.

    ``basis[i]`` is the dual-space direction associated with
    ``exponents[i]``; exponents are sorted descending.  ``exponents`` are
    Richardson-refined when refinement was requested, ``raw_exponents``
    always hold the plain horizon-t* estimate.
    """

    exponents: np.ndarray
    basis: np.ndarray
    horizon: float
    residual: float
    raw_exponents: np.ndarray
    method: str = "svd"

    def default_tol(self) -> float:
        return 1e-3 * (1.0 + max(float(self.exponents[0]), 0.0))


def default_residual_tol(top_exponent: float) -> float:
    """Residual threshold 1e-3 (1 + lambda_1), scaling with the spectrum."""
    return 1e-3 * (1.0 + max(float(top_exponent), 0.0))


def limiting_matrix_estimate(m, t: float) -> np.ndarray:
    """ln(M M^T) / (2t) computed from the SVD of M (no explicit squaring)."""
    m = np.asarray(m, dtype=float)
    if t <= 0:
        raise ValueError("t must be positive")
    if not np.all(np.isfinite(m)):
        raise SingularM("matrix has non-finite entries")
    u, sv, _ = np.linalg.svd(m)
    if sv[-1] <= 0:
        raise SingularM("matrix is numerically singular")
    return (u * (np.log(sv) / t)) @ u.T


def _check_residual(residual, exponents, residual_tol):
    tol = default_residual_tol(exponents[0]) if residual_tol is None else residual_tol
    if residual > tol:
        raise NotConverged(
            f"Lyapunov residual {residual:.3g} exceeds tolerance {tol:.3g}; raise t_star")


def spectrum_from_propagation(series: PropagationResult, residual_tol: Optional[float] = None,
                              refine: bool = True) -> LyapunovData:
    """Exponents and basis from a stored trajectory (SVD estimator).

    The residual compares the limiting-matrix estimates at the final
    horizon and at the stored sample nearest half of it.
    """
    t_star = series.t_final
    l_full = limiting_matrix_estimate(series.final_matrix, t_star)
    idx_half = series.index_at(0.5 * t_star)
    t_half = float(series.times[idx_half])
    if t_half <= 0:
        raise NotConverged("trajectory too short to halve the horizon")
    l_half = limiting_matrix_estimate(series.matrices[idx_half], t_half)
    residual = _maxabs(l_full - l_half)

    w, vecs = np.linalg.eigh(l_full)
    order = np.argsort(w)[::-1]
    raw = w[order]
    basis = vecs[:, order].T
    exps = raw
    if refine:
        w_half = np.sort(np.linalg.eigvalsh(l_half))[::-1]
        exps = 2.0 * raw - w_half
    _check_residual(residual, exps, residual_tol)
    return LyapunovData(exponents=exps, basis=basis, horizon=t_star,
                        residual=residual, raw_exponents=raw, method="svd")


def qr_spectrum(ham: QuadraticHamiltonian, t_star: float, dt: float,
                reorth_every: int = 5, residual_tol: Optional[float] = None,
                refine: bool = True) -> LyapunovData:
    """Long-horizon spectrum by re-orthonormalized push-forward.

    Propagates an orthonormal frame with the same midpoint-sampled
    per-step exponentials as :func:`~entgrowth.dynamics.propagate`,
    QR-factorizing every ``reorth_every`` steps and accumulating the log
    diagonal of R.  Never forms M(t), so there is no overflow and no
    precision floor on contracting directions.
    """
    if dt <= 0 or t_star <= 0:
        raise ValueError("need dt > 0 and t_star > 0")
    n_steps = max(2, int(round(t_star / dt)))
    dt_eff = t_star / n_steps
    dim = 2 * ham.n_modes

    step_const = None
    if not ham.time_dependent:
        step_const = expm(dt_eff * generator(ham, 0.5 * dt_eff))

    q = np.eye(dim)
    logs = np.zeros(dim)
    logs_half = None
    t_half = None
    half_step = n_steps // 2
    acc = np.eye(dim)
    pending = 0
    t = 0.0
    for k in range(1, n_steps + 1):
        t_mid = t + 0.5 * dt_eff
        step = step_const if step_const is not None else expm(dt_eff * generator(ham, t_mid))
        acc = step @ acc
        pending += 1
        t = k * dt_eff
        if pending == reorth_every or k == n_steps or k == half_step:
            q, r = np.linalg.qr(acc @ q)
            diag = np.diag(r)
            q = q * np.sign(diag)
            logs += np.log(np.abs(diag))
            acc = np.eye(dim)
            pending = 0
        if k == half_step:
            logs_half = logs.copy()
            t_half = t

    raw = logs / t_star
    lam_half = logs_half / t_half
    # the frame converges to descending order from a generic start, but
    # finite horizons can leave near-degenerate pairs swapped
    order = np.argsort(raw)[::-1]
    raw = raw[order]
    lam_half = np.sort(lam_half)[::-1]
    basis = q[:, order].T
    residual = float(np.max(np.abs(raw - lam_half)))
    exps = 2.0 * raw - lam_half if refine else raw
    _check_residual(residual, exps, residual_tol)
    return LyapunovData(exponents=exps, basis=basis, horizon=t_star,
                        residual=residual, raw_exponents=raw, method="qr")


def lyapunov_spectrum(ham: QuadraticHamiltonian, t_star: float, dt: float,
                      method: str = "auto", residual_tol: Optional[float] = None,
                      refine: bool = True, store_every: int = 10) -> LyapunovData:
    """Estimate the Lyapunov spectrum of the flow of ``ham`` at horizon ``t_star``.

    ``method="auto"`` probes the top exponent on a short run and uses the
    SVD estimator while lambda_1 * t_star stays within its resolvable
    range, switching to QR accumulation beyond it.
    """
    if method not in ("auto", "svd", "qr"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        probe_t = min(t_star, max(10.0 * dt, _SVD_RANGE / 8.0))
        probe = propagate(ham, probe_t, dt, store_every=max(1, int(round(probe_t / dt / 4))))
        sv = np.linalg.svd(probe.final_matrix, compute_uv=False)
        top = np.log(sv[0]) / probe.t_final
        method = "svd" if top * t_star <= _SVD_RANGE else "qr"
    if method == "qr":
        return qr_spectrum(ham, t_star, dt, residual_tol=residual_tol, refine=refine)
    series = propagate(ham, t_star, dt, store_every=store_every)
    return spectrum_from_propagation(series, residual_tol=residual_tol, refine=refine)


def vector_exponent(series: PropagationResult, ell, residual_tol: Optional[float] = None):
    """Finite-horizon exponent ln |M(t)^T ell| / t of one dual vector.

    Returns ``(value, residual)`` where the residual is the change under
    halving the horizon.  Raises NotConverged when the residual exceeds
    the tolerance (default rule scales with the estimate).
    """
    ell = np.asarray(ell, dtype=float)
    norm0 = np.linalg.norm(ell)
    if norm0 == 0:
        raise ValueError("direction vector must be nonzero")
    t_star = series.t_final
    val = float(np.log(np.linalg.norm(series.final_matrix.T @ ell) / norm0) / t_star)
    idx_half = series.index_at(0.5 * t_star)
    t_half = float(series.times[idx_half])
    if t_half <= 0:
        raise NotConverged("trajectory too short to halve the horizon")
    val_half = float(np.log(np.linalg.norm(series.matrices[idx_half].T @ ell) / norm0) / t_half)
    residual = abs(val - val_half)
    tol = default_residual_tol(val) if residual_tol is None else residual_tol
    if residual > tol:
        raise NotConverged(f"vector-exponent residual {residual:.3g} exceeds {tol:.3g}")
    return val, residual


@dataclass(frozen=True)
class RegularityReport:
    is_regular: bool
    max_violation: float
    tol: float


def regularity_check(data: LyapunovData, tol: Optional[float] = None) -> RegularityReport:
    """Check that exponents come in conjugate pairs lambda_k = -lambda_{2N+1-k}."""
    if tol is None:
        tol = max(1e-8, 2.0 * data.residual)
    lam = data.exponents
    viol = float(np.max(np.abs(lam + lam[::-1])))
    return RegularityReport(is_regular=viol <= tol, max_violation=viol, tol=tol)


@dataclass(frozen=True)
class PolarExponentComparison:
    """Spectra of M(t), of its positive polar factor T(t), and of sqrt(T(t))."""

    exponents_m: np.ndarray
    exponents_t: np.ndarray
    exponents_sqrt_t: np.ndarray
    max_dev_t: float
    max_dev_sqrt: float
    residual: float
    tol: float


def polar_factor_exponents(series: PropagationResult, residual_tol: Optional[float] = None,
                           comparison_tol: Optional[float] = None) -> PolarExponentComparison:
    """Check lambda(T) = lambda(M) and lambda(sqrt T) = lambda(M)/2.

    The three spectra are estimated through different numerical paths (SVD
    of M, eigensolve of the polar factor, eigensolve of its square root)
    at the final horizon and compared within the convergence residual.
    """
    t_star = series.t_final
    m = series.final_matrix
    data = spectrum_from_propagation(series, residual_tol=residual_tol, refine=False)
    lam_m = data.raw_exponents

    t_part = polar_decompose(m).t_part
    w_t = np.sort(np.linalg.eigvalsh(t_part))[::-1]
    if w_t[-1] <= 0:
        raise SingularM("polar factor lost positivity")
    lam_t = np.log(w_t) / t_star
    lam_sqrt = 0.5 * np.log(w_t) / t_star   # eigenvalues of sqrt(T) are sqrt(eigs of T)

    dev_t = float(np.max(np.abs(lam_t - lam_m)))
    dev_sqrt = float(np.max(np.abs(lam_sqrt - lam_m / 2.0)))
    tol = comparison_tol if comparison_tol is not None else max(2.0 * data.residual, 1e-8)
    if dev_t > tol or dev_sqrt > tol:
        raise NotConverged(
            f"polar-factor spectra disagree beyond tolerance: "
            f"dev(T)={dev_t:.3g}, dev(sqrt T)={dev_sqrt:.3g}, tol={tol:.3g}")
    return PolarExponentComparison(
        exponents_m=lam_m, exponents_t=lam_t, exponents_sqrt_t=lam_sqrt,
        max_dev_t=dev_t, max_dev_sqrt=dev_sqrt, residual=data.residual, tol=tol)


def degenerate_clusters(exponents, gap: float = 1e-6):
    """Group indices of (sorted) exponents into clusters separated by < gap.

    Eigenvector directions inside a cluster are numerically arbitrary;
    only cluster spans are meaningful to downstream column selection.
    """
    exponents = np.asarray(exponents, dtype=float)
    clusters = [[0]]
    for i in range(1, len(exponents)):
        if exponents[i - 1] - exponents[i] < gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters
