"""Phase-space conventions, covariance-matrix checks, and subsystem restriction.

Conventions used everywhere in this package:

* quadrature basis order is (q1, p1, ..., qN, pN);
* hbar = 1 and the vacuum covariance matrix is the identity;
* the symplectic form is block diagonal with 2x2 blocks [[0, 1], [-1, 0]].

Covariance matrices are plain ``numpy`` arrays; the helpers here check
validity (symmetry, positive definiteness, uncertainty bound) and compute
the symplectic (Williamson) eigenvalues that all entropy formulas consume.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NotDarboux,
    NotPositiveDefinite,
    NotSymmetric,
    UncertaintyViolated,
)

SYMMETRY_TOL = 1e-12
UNCERTAINTY_SLACK = 1e-9
PURITY_TOL = 1e-8
FORM_TOL = 1e-12


def _maxabs(a):
    return float(np.max(np.abs(a))) if np.asarray(a).size else 0.0


def standard_omega(n_modes: int) -> np.ndarray:
    """Symplectic form for ``n_modes`` modes in (q1, p1, ..., qN, pN) order."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        omega[2 * i:2 * i + 2, 2 * i:2 * i + 2] = block
    return omega


def n_modes_of(g: np.ndarray) -> int:
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise DimensionMismatch(f"expected square even-dimensional matrix, got shape {g.shape}")
    return g.shape[0] // 2


def is_symmetric(a, tol=SYMMETRY_TOL):
    a = np.asarray(a)
    # tolerance scales with the entry size so that long propagations
    # (entries ~ e^{2 lambda t}) are not rejected on roundoff
    return _maxabs(a - a.T) <= tol * (1.0 + _maxabs(a))


def complex_structure(g: np.ndarray) -> np.ndarray:
    """Linear complex structure J = G Omega^{-1} of a covariance matrix."""
    g = np.asarray(g, dtype=float)
    omega = standard_omega(n_modes_of(g))
    return -g @ omega  # Omega^{-1} = -Omega


@dataclass(frozen=True)
class ModeCount:
    """Bipartition of ``n_total`` modes; subsystem A is the first ``n_a`` modes."""

    n_total: int
    n_a: int

    def __post_init__(self):
        if not (0 < self.n_a < self.n_total):
            raise ValueError(f"need 0 < n_a < n_total, got n_a={self.n_a}, n_total={self.n_total}")

    @property
    def n_b(self) -> int:
        return self.n_total - self.n_a


@dataclass(frozen=True)
class CovarianceCheck:
    """Result of :func:`validate_covariance`.

    ``eigenvalues`` holds the spectrum of -J^2 (sorted ascending, real
    parts); ``verdict`` is "valid" or the name of the first failed check.
    """

    eigenvalues: np.ndarray
    verdict: str

    @property
    def is_valid(self) -> bool:
        return self.verdict == "valid"


def validate_covariance(g, symmetry_tol=SYMMETRY_TOL, uncertainty_slack=UNCERTAINTY_SLACK) -> CovarianceCheck:
    """Check symmetry, positive definiteness and the uncertainty bound.

    The uncertainty bound requires every eigenvalue of -J^2 (with
    J = G Omega^{-1}) to be at least ``1 - uncertainty_slack``.
    """
    g = np.asarray(g, dtype=float)
    n_modes_of(g)
    j = complex_structure(0.5 * (g + g.T))
    eigs = np.sort(np.linalg.eigvals(-(j @ j)).real)
    if not is_symmetric(g, symmetry_tol):
        return CovarianceCheck(eigs, "not_symmetric")
    try:
        np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError:
        return CovarianceCheck(eigs, "not_positive_definite")
    if eigs[0] < 1.0 - uncertainty_slack:
        return CovarianceCheck(eigs, "uncertainty_violated")
    return CovarianceCheck(eigs, "valid")


_VERDICT_ERRORS = {
    "not_symmetric": NotSymmetric,
    "not_positive_definite": NotPositiveDefinite,
    "uncertainty_violated": UncertaintyViolated,
}


def require_valid_covariance(g, **kwargs) -> None:
    """Raise the typed error for the first failed covariance check, if any."""
    check = validate_covariance(g, **kwargs)
    if not check.is_valid:
        err = _VERDICT_ERRORS[check.verdict]
        raise err(f"covariance check failed: {check.verdict} "
                  f"(min eig of -J^2 = {check.eigenvalues[0]:.6g})")


def williamson_spectrum(g, method: str = "chol", validate: bool = True) -> np.ndarray:
    """Symplectic eigenvalues nu_1 >= ... >= nu_N of a covariance matrix.

    ``method="chol"`` computes the singular values of L^T Omega L with
    G = L L^T, which is far better conditioned at large squeezing than an
    eigensolve of Omega G (for a single mode it reduces to det L, exact);
    ``method="eig"`` takes the magnitudes of the +-i nu eigenvalue pairs of
    Omega G, with a check that they are dominantly imaginary.
    """
    g = np.asarray(g, dtype=float)
    if validate:
        require_valid_covariance(g)
    n = n_modes_of(g)
    omega = standard_omega(n)
    if method == "chol":
        ell = np.linalg.cholesky(0.5 * (g + g.T))
        sv = np.linalg.svd(ell.T @ omega @ ell, compute_uv=False)
        return sv[0::2]
    if method == "eig":
        ev = np.linalg.eigvals(omega @ g)
        # eigenvalues come in pairs +-i nu; reject if real parts are not negligible
        scale = np.max(np.abs(ev))
        if np.max(np.abs(ev.real)) > 1e-6 * (scale + 1.0):
            raise UncertaintyViolated("eigenvalues of Omega G are not dominantly imaginary; "
                                      "input is not a valid covariance matrix")
        return np.sort(np.abs(ev.imag))[::-2]
    raise ValueError(f"unknown method {method!r}")


def is_pure(g, tol: float = PURITY_TOL) -> bool:
    """True iff J^2 = -identity to within ``tol`` (max-abs entry)."""
    j = complex_structure(np.asarray(g, dtype=float))
    dim = j.shape[0]
    return _maxabs(j @ j + np.eye(dim)) <= tol


@dataclass(frozen=True)
class SubsystemSpec:
    """Selector of a subsystem: rows combine quadratures into new canonical pairs.

    ``selector`` is a (2 N_A) x (2 N) matrix F with F Omega F^T equal to the
    standard form of the subsystem, so the selected quadratures satisfy the
    canonical commutation relations.
    """

    selector: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.selector, dtype=float)
        if f.ndim != 2 or f.shape[0] % 2 or f.shape[1] % 2 or f.shape[0] > f.shape[1]:
            raise DimensionMismatch(f"bad selector shape {f.shape}")
        object.__setattr__(self, "selector", f)
        omega_full = standard_omega(f.shape[1] // 2)
        omega_sub = standard_omega(f.shape[0] // 2)
        defect = _maxabs(f @ omega_full @ f.T - omega_sub)
        # absolute tolerance, scaled up only when the selector itself has
        # large entries (e.g. transported selectors F M at large time)
        if defect > FORM_TOL * (1.0 + _maxabs(f) ** 2):
            raise NotDarboux(f"selector does not preserve the symplectic form (defect {defect:.3g})")

    @property
    def n_a(self) -> int:
        return self.selector.shape[0] // 2

    @property
    def n_total(self) -> int:
        return self.selector.shape[1] // 2

    @classmethod
    def first_modes(cls, n_a: int, n_total: int) -> "SubsystemSpec":
        return cls.modes(range(n_a), n_total)

    @classmethod
    def modes(cls, mode_indices, n_total: int) -> "SubsystemSpec":
        """Subsystem made of the given modes (0-based), in the given order."""
        idx = list(mode_indices)
        if len(set(idx)) != len(idx) or any(not 0 <= m < n_total for m in idx):
            raise ValueError(f"bad mode indices {idx} for {n_total} modes")
        f = np.zeros((2 * len(idx), 2 * n_total))
        for k, m in enumerate(idx):
            f[2 * k, 2 * m] = 1.0
            f[2 * k + 1, 2 * m + 1] = 1.0
        return cls(f)

    def compose(self, inner: "SubsystemSpec") -> "SubsystemSpec":
        """Restriction of a restriction: selector of ``inner`` applied after self."""
        return SubsystemSpec(inner.selector @ self.selector)


def restrict(g, sub: SubsystemSpec) -> np.ndarray:
    """Covariance matrix of the subsystem, F G F^T (symmetrized)."""
    g = np.asarray(g, dtype=float)
    f = sub.selector
    if g.shape[0] != f.shape[1]:
        raise DimensionMismatch(f"covariance is {g.shape}, selector expects {f.shape[1]} columns")
    out = f @ g @ f.T
    return 0.5 * (out + out.T)


def split_blocks(g, split: ModeCount):
    """A- and B-blocks of a covariance matrix under a first-modes bipartition."""
    g = np.asarray(g, dtype=float)
    if g.shape[0] != 2 * split.n_total:
        raise DimensionMismatch(f"covariance is {g.shape}, split expects {2 * split.n_total}")
    k = 2 * split.n_a
    return g[:k, :k], g[k:, k:]


@dataclass(frozen=True)
class GaussianState:
    """Covariance matrix plus displacement vector."""

    cov: np.ndarray
    disp: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        disp = np.asarray(self.disp, dtype=float)
        if disp.shape != (cov.shape[0],):
            raise DimensionMismatch(f"displacement shape {disp.shape} vs covariance {cov.shape}")
        if not np.all(np.isfinite(disp)):
            raise ValueError("displacement has non-finite entries")
        require_valid_covariance(cov)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "disp", disp)

    @classmethod
    def vacuum(cls, n_modes: int) -> "GaussianState":
        return cls(np.eye(2 * n_modes), np.zeros(2 * n_modes))
