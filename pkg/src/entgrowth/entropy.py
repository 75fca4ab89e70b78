"""Entropy functionals on Gaussian covariance data.

All entropies are in nats.  The von Neumann entropy is a sum of
single-eigenvalue terms over the symplectic spectrum; the Renyi-2 entropy
is half the log-determinant of the covariance matrix; the asymptotic
entropy ``0.5 ln det(e G / 2)`` is defined on the whole positive-definite
cone (it does not require the uncertainty bound) and sits a fixed
``N ln(e/2)`` above the Renyi-2 value.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CorridorViolated, NotPositiveDefinite
from .phase_space import (
    ModeCount,
    n_modes_of,
    require_valid_covariance,
    split_blocks,
    williamson_spectrum,
)

LN_E_OVER_2 = 1.0 - math.log(2.0)

_SERIES_CUT = 1e-6   # below this, nu - 1 is evaluated by series
_LARGE_CUT = 1e6     # above this, the direct formula loses precision to cancellation


def mode_entropy(nu: float) -> float:
    """Entropy contribution s(nu) of a single symplectic eigenvalue.

    s(nu) = ((nu+1)/2) ln((nu+1)/2) - ((nu-1)/2) ln((nu-1)/2), continued
    by its limit s(1) = 0.  Values slightly below 1 (roundoff) are clamped.
    """
    nu = float(nu)
    if nu <= 1.0:
        return 0.0
    eps = 0.5 * (nu - 1.0)
    if nu - 1.0 < _SERIES_CUT:
        # (1+eps)ln(1+eps) - eps ln eps  ~  eps (1 - ln eps) + eps^2/2
        return eps * (1.0 - math.log(eps)) + 0.5 * eps * eps
    if nu > _LARGE_CUT:
        # central-difference expansion of x ln x; direct evaluation would
        # cancel ~ eps*nu of precision
        return math.log(0.5 * nu) + 1.0 - 1.0 / (6.0 * nu * nu)
    hi = 0.5 * (nu + 1.0)
    return hi * math.log(hi) - eps * math.log(eps)


def logdet_pd(a) -> float:
    """log det of a positive definite matrix via Cholesky (overflow safe)."""
    a = np.asarray(a, dtype=float)
    try:
        ell = np.linalg.cholesky(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(ell))))


def von_neumann_entropy(g) -> float:
    """Von Neumann entropy of the Gaussian state with covariance ``g``."""
    return float(sum(mode_entropy(nu) for nu in williamson_spectrum(g)))


def renyi2_entropy(g) -> float:
    """Renyi-2 entropy: half the log-determinant of the covariance matrix."""
    require_valid_covariance(g)
    return 0.5 * logdet_pd(g)


def asymptotic_entropy(g) -> float:
    """0.5 ln det(e G / 2) for any positive definite ``g``.

    Defined on the full PD cone; for a valid covariance matrix it equals
    the Renyi-2 entropy plus N ln(e/2) and upper-bounds the von Neumann
    entropy.
    """
    g = np.asarray(g, dtype=float)
    n = n_modes_of(g)
    return 0.5 * logdet_pd(g) + n * LN_E_OVER_2


@dataclass(frozen=True)
class EntropyReport:
    """Von Neumann, Renyi-2 and asymptotic entropies of one covariance matrix."""

    s_vn: float
    s_r2: float
    s_as: float
    n_modes: int


def corridor_check(g, slack: float = 1e-9) -> EntropyReport:
    """Compute all three entropies and verify the two-sided corridor.

    Checks s_r2 <= s_vn <= s_r2 + N ln(e/2), and the near-saturation bound
    s_as - s_vn <= (N / nu_min^2) ln(e/2): the upper corridor wall becomes
    exact when all symplectic eigenvalues are large.
    """
    nus = williamson_spectrum(g)
    n = len(nus)
    s_vn = float(sum(mode_entropy(nu) for nu in nus))
    s_r2 = float(np.sum(np.log(nus)))
    s_as = s_r2 + n * LN_E_OVER_2
    report = EntropyReport(s_vn=s_vn, s_r2=s_r2, s_as=s_as, n_modes=n)
    if not (s_r2 - slack <= s_vn <= s_as + slack):
        raise CorridorViolated(
            f"entropy corridor violated: S2={s_r2:.12g}, S={s_vn:.12g}, Sas={s_as:.12g}",
            s_vn=s_vn, s_r2=s_r2, s_as=s_as)
    nu_min = float(np.min(nus))
    if s_as - s_vn > n / nu_min ** 2 * LN_E_OVER_2 + slack:
        raise CorridorViolated(
            f"near-saturation bound violated: gap={s_as - s_vn:.12g} at nu_min={nu_min:.6g}",
            s_vn=s_vn, s_r2=s_r2, s_as=s_as)
    return report


def mutual_information(g, split: ModeCount) -> float:
    """S(A) + S(B) - S(AB) across the first-modes bipartition."""
    g_a, g_b = split_blocks(g, split)
    return von_neumann_entropy(g_a) + von_neumann_entropy(g_b) - von_neumann_entropy(g)


def mutual_information_asymptotic(g, split: ModeCount) -> float:
    """Asymptotic-entropy mutual information on the PD cone.

    The N ln(e/2) constants cancel across the bipartition, leaving
    0.5 (ln det G_A + ln det G_B - ln det G).  Can be negative for general
    positive definite G.
    """
    g_a, g_b = split_blocks(g, split)
    return 0.5 * (logdet_pd(g_a) + logdet_pd(g_b) - logdet_pd(g))
