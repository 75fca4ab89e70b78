"""Generalized-subadditivity objectives, stationarity checks, and entropy bounds.

The central object is the minimization over positive definite matrices G of

    I_as(A;B)(G) + I_as(A;B)(M G M^T),

whose value lower-bounds the sum of mutual informations of any state and
its image under the symplectic transformation M.  The minimizer is a
quasi-Newton descent on Cholesky factors (log-parametrized diagonal) with
central finite-difference gradients and informed restarts.  When M is
positive definite the stationary point is known in closed form
(G = M^{-1}, value 2 I_as(M)) and is used both as a restart and as a test
oracle.

The infimum may sit at the boundary of the cone (covariance entries
running to infinity); the minimizer reports a divergence flag instead of
failing in that case.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .entropy import LN_E_OVER_2, logdet_pd
from .errors import DimensionMismatch, NotDarboux, NotPositiveDefinite
from .phase_space import (
    FORM_TOL,
    ModeCount,
    SubsystemSpec,
    _maxabs,
    standard_omega,
)

DIVERGENCE_NORM = 1e6


@dataclass(frozen=True)
class SubsystemFamily:
    """Weighted family of form-preserving selectors.

    Each member is a pair (F_i, p_i) with F_i preserving the symplectic
    form and the weights satisfying the scaling condition
    sum_i p_i N_i = N.
    """

    members: tuple
    n_total: int

    def __post_init__(self):
        omega_full = standard_omega(self.n_total)
        scaled = 0.0
        checked = []
        for f, p in self.members:
            f = np.asarray(f, dtype=float)
            if p < 0:
                raise ValueError("weights must be nonnegative")
            if f.shape[1] != 2 * self.n_total or f.shape[0] % 2:
                raise DimensionMismatch(f"selector shape {f.shape} for {self.n_total} modes")
            omega_sub = standard_omega(f.shape[0] // 2)
            defect = _maxabs(f @ omega_full @ f.T - omega_sub)
            if defect > FORM_TOL * (1.0 + _maxabs(f) ** 2):
                raise NotDarboux(f"family member does not preserve the form (defect {defect:.3g})")
            scaled += p * (f.shape[0] // 2)
            checked.append((f, float(p)))
        if abs(scaled - self.n_total) > 1e-12 * max(1.0, self.n_total):
            raise ValueError(f"scaling condition violated: sum p_i N_i = {scaled} != {self.n_total}")
        object.__setattr__(self, "members", tuple(checked))

    @classmethod
    def whole_system(cls, n_total: int) -> "SubsystemFamily":
        return cls(members=((np.eye(2 * n_total), 1.0),), n_total=n_total)

    @classmethod
    def transported_pair(cls, split: ModeCount, m) -> "SubsystemFamily":
        """The four-member family {A, B, A M, B M} at weight 1/2 each."""
        m = np.asarray(m, dtype=float)
        f_a = SubsystemSpec.first_modes(split.n_a, split.n_total).selector
        f_b = SubsystemSpec.modes(range(split.n_a, split.n_total), split.n_total).selector
        return cls(members=((f_a, 0.5), (f_b, 0.5), (f_a @ m, 0.5), (f_b @ m, 0.5)),
                   n_total=split.n_total)


def _sas(g) -> float:
    n = g.shape[0] // 2
    return 0.5 * logdet_pd(g) + n * LN_E_OVER_2


def gss_objective(g, fam: SubsystemFamily) -> float:
    """S_as(G) - sum_i p_i S_as(F_i G F_i^T); the quantity the supremum runs over."""
    g = np.asarray(g, dtype=float)
    if g.shape != (2 * fam.n_total, 2 * fam.n_total):
        raise DimensionMismatch(f"matrix shape {g.shape} vs family on {fam.n_total} modes")
    total = _sas(g)
    for f, p in fam.members:
        if p == 0.0:
            continue
        block = f @ g @ f.T
        total -= p * _sas(0.5 * (block + block.T))
    return total


def stationarity_residual(g, fam: SubsystemFamily) -> float:
    """Relative residual of G^{-1} = sum_i p_i F_i^T (F_i G F_i^T)^{-1} F_i."""
    g = np.asarray(g, dtype=float)
    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is singular") from exc
    logdet_pd(g)  # raises NotPositiveDefinite for non-PD input
    acc = np.zeros_like(g)
    for f, p in fam.members:
        if p == 0.0:
            continue
        block = f @ g @ f.T
        acc += p * (f.T @ np.linalg.inv(0.5 * (block + block.T)) @ f)
    return _maxabs(g_inv - acc) / _maxabs(g_inv)


@dataclass
class BoundReport:
    """Outcome of one right-hand-side minimization."""

    value: float
    argmin_g: Optional[np.ndarray]
    residual: float
    iterations: int
    converged: bool
    diverged: bool


def _mutual_info_as(g, k):
    return 0.5 * (logdet_pd(g[:k, :k]) + logdet_pd(g[k:, k:]) - logdet_pd(g))


def _rhs_objective(m, k):
    def objective(g):
        return _mutual_info_as(g, k) + _mutual_info_as(m @ g @ m.T, k)
    return objective


def _unpack_cholesky(x, dim, tril_idx, diag_pos):
    c = np.zeros((dim, dim))
    c[tril_idx] = x
    d = np.arange(dim)
    c[d, d] = np.exp(x[diag_pos])
    return c


def _is_pd_symmetric(m):
    if _maxabs(m - m.T) > 1e-10 * (1.0 + _maxabs(m)):
        return False
    try:
        np.linalg.cholesky(0.5 * (m + m.T))
        return True
    except np.linalg.LinAlgError:
        return False


def gss_rhs_minimize(m, split: ModeCount, budget: int = 2000,
                     gtol: float = 1e-9, ftol: float = 1e-14,
                     informed_starts: bool = True) -> BoundReport:
    """Minimize I_as(A;B)(G) + I_as(A;B)(M G M^T) over positive definite G.

    G is parametrized as C C^T with lower-triangular C and log-parametrized
    diagonal so iterates stay inside the cone; descent is L-BFGS with
    central finite-difference gradients, restarted from the identity and
    (with ``informed_starts``) from M^{-1} when M is positive definite (the
    known stationary point) and from (M M^T)^{-1/2}.  ``budget`` caps total
    iterations across restarts; exhaustion returns the best point flagged
    non-converged.
    """
    m = np.asarray(m, dtype=float)
    dim = 2 * split.n_total
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"transformation shape {m.shape} vs split {split}")
    k = 2 * split.n_a
    objective = _rhs_objective(m, k)

    tril_idx = np.tril_indices(dim)
    diag_pos = np.array([i * (i + 1) // 2 + i for i in range(dim)])

    def fun(x):
        c = _unpack_cholesky(x, dim, tril_idx, diag_pos)
        g = c @ c.T
        try:
            return objective(g)
        except NotPositiveDefinite:
            return 1e12

    starts = [np.eye(dim)]
    if informed_starts:
        if _is_pd_symmetric(m):
            starts.append(np.linalg.inv(m))
        w, vecs = np.linalg.eigh(m @ m.T)
        if w[0] > 0:
            starts.append((vecs / np.sqrt(w)) @ vecs.T)   # (M M^T)^{-1/2}

    best = None
    iterations = 0
    converged = False
    per_start = max(50, budget // len(starts))
    for g_start in starts:
        if iterations >= budget:
            break
        try:
            c0 = np.linalg.cholesky(0.5 * (g_start + g_start.T))
        except np.linalg.LinAlgError:
            continue
        x0 = c0[tril_idx].copy()
        x0[diag_pos] = np.log(np.diag(c0))
        res = minimize(fun, x0, method="L-BFGS-B", jac="3-point",
                       options=dict(maxiter=min(per_start, budget - iterations),
                                    ftol=ftol, gtol=gtol))
        iterations += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
            converged = bool(res.success)
    if best is None:
        raise NotPositiveDefinite("no feasible starting point")

    c = _unpack_cholesky(best.x, dim, tril_idx, diag_pos)
    g_best = c @ c.T
    g_best = 0.5 * (g_best + g_best.T)
    fam = SubsystemFamily.transported_pair(split, m)
    residual = stationarity_residual(g_best, fam)
    diverged = _maxabs(g_best) > DIVERGENCE_NORM
    return BoundReport(value=float(best.fun), argmin_g=g_best, residual=float(residual),
                       iterations=iterations, converged=converged, diverged=diverged)


def _require_pd_symplectic(t_mat):
    # a polar factor at long times has eigenvalues below the eps*|T| floor
    # of dense storage, so positivity is checked to roundoff scale only;
    # the determinant blocks the bounds consume enforce their own PD-ness
    t_mat = np.asarray(t_mat, dtype=float)
    if _maxabs(t_mat - t_mat.T) > 1e-10 * (1.0 + _maxabs(t_mat)):
        raise NotPositiveDefinite("expected a symmetric positive definite matrix")
    w = np.linalg.eigvalsh(t_mat)
    if w[-1] <= 0 or w[0] < -1e-12 * (1.0 + w[-1]):
        raise NotPositiveDefinite(f"matrix has negative eigenvalue {w[0]:.3g}")
    omega = standard_omega(t_mat.shape[0] // 2)
    if _maxabs(t_mat @ omega @ t_mat.T - omega) > 1e-8 * (1.0 + _maxabs(t_mat) ** 2):
        raise ValueError("matrix is not symplectic")
    return t_mat


def op_norm(g) -> float:
    """Operator norm (largest eigenvalue) of a symmetric PD matrix."""
    return float(np.linalg.eigvalsh(np.asarray(g, dtype=float))[-1])


def _sas_blocks(t_mat, split: ModeCount):
    """Block asymptotic entropies of a symplectic PD matrix.

    A symplectic positive definite matrix is a pure covariance matrix, so
    its two reduced blocks share the nontrivial symplectic spectrum and
    det(T_A) = det(T_B) exactly.  Evaluating both through the smaller block
    keeps the computation inside double range when the large block mixes
    directions spread over e^{+-lambda t}.
    """
    k = 2 * split.n_a
    if split.n_a <= split.n_b:
        logdet = logdet_pd(t_mat[:k, :k])
    else:
        logdet = logdet_pd(t_mat[k:, k:])
    s_a = 0.5 * logdet + split.n_a * LN_E_OVER_2
    s_b = 0.5 * logdet + split.n_b * LN_E_OVER_2
    return s_a, s_b


def pure_state_growth_lower_bound(t_mat, g0, split: ModeCount) -> float:
    """Lower bound on the subsystem entropy generated from any pure state.

    ``t_mat`` is the positive polar factor of the transformation and ``g0``
    the initial covariance matrix; the bound is

        S_as(A)(T) + S_as(B)(T) - N ln(e/2) - N_A ln(e |G0| / 2)

    with |G0| the operator norm.
    """
    t_mat = _require_pd_symplectic(t_mat)
    s_a, s_b = _sas_blocks(t_mat, split)
    norm = op_norm(g0)
    return (s_a + s_b - split.n_total * LN_E_OVER_2
            - split.n_a * (LN_E_OVER_2 + np.log(norm)))


def squashed_bounds(t_mat, g0, split: ModeCount):
    """Two-sided bounds on the squashed entanglement after the transformation.

    Returns ``(lower, upper)``:

        upper = 0.5 S_as(A)(T^2) + 0.5 S_as(B)(T^2) + (N/2) ln |G0|
        lower = S_as(A)(T) + S_as(B)(T) - 2N ln(e/2) - N ln |G0|

    For pure states the squashed entanglement equals the entanglement
    entropy, so the oracle trajectory must thread between the two.
    """
    t_mat = _require_pd_symplectic(t_mat)
    norm = op_norm(g0)
    n = split.n_total
    t_sq = t_mat @ t_mat
    sa2, sb2 = _sas_blocks(0.5 * (t_sq + t_sq.T), split)
    upper = 0.5 * sa2 + 0.5 * sb2 + 0.5 * n * np.log(norm)
    sa, sb = _sas_blocks(t_mat, split)
    lower = sa + sb - 2.0 * n * LN_E_OVER_2 - n * np.log(norm)
    if lower > upper + 1e-9:
        raise RuntimeError(f"bound ordering violated: lower={lower} > upper={upper}")
    return float(lower), float(upper)
