"""Brute-force truncated-number-basis simulator for one to three modes.

This is the independent cross-check for everything the Gaussian pipeline
claims: it evolves arbitrary pure states (Fock, coherent, cat,
superpositions) under the same quadratic Hamiltonians by dense unitary
steps and measures true reduced entropies from Schmidt coefficients.

Truncation policy: a hard ceiling on the population of the top two levels
of any mode.  Once exceeded, later samples are marked untrusted rather
than silently kept; unstable dynamics leaves any fixed cutoff eventually,
so honest windows beat adaptive cutoff growth.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import QuadraticHamiltonian
from .errors import (
    DimensionMismatch,
    NonHermitian,
    TruncationLeak,
    WindowTooShort,
)
from .fitting import SlopeFit, fit_slope, windowed
from .phase_space import require_valid_covariance


@dataclass(frozen=True)
class FockConfig:
    """Truncation and stepping parameters of the oracle."""

    n_modes: int
    cutoff: int
    dt: float
    leak_ceiling: float = 1e-6
    max_dim: int = 4096

    def __post_init__(self):
        if not 1 <= self.n_modes <= 3:
            raise ValueError("oracle supports 1 to 3 modes")
        if self.cutoff < 4:
            raise ValueError("cutoff must be at least 4")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.dim > self.max_dim:
            raise ValueError(f"total dimension {self.dim} exceeds bound {self.max_dim}")

    @property
    def dim(self) -> int:
        return self.cutoff ** self.n_modes


def _ladder(d):
    return np.diag(np.sqrt(np.arange(1.0, d)), k=1)


def _local_quadratures(d):
    a = _ladder(d)
    q = (a + a.T) / np.sqrt(2.0)
    p = (a - a.T) / (1j * np.sqrt(2.0))
    return q, p


def _full_quadratures(n_modes, cutoff):
    q, p = _local_quadratures(cutoff)
    eye = np.eye(cutoff)
    ops = []
    for mode in range(n_modes):
        for local in (q, p):
            factors = [eye] * n_modes
            factors[mode] = local
            full = factors[0]
            for fac in factors[1:]:
                full = np.kron(full, fac)
            ops.append(full)
    return ops


def build_quadratures(cfg: FockConfig):
    """Full-space quadrature operators in (q1, p1, ..., qN, pN) order.

    On the truncated ladder [q_i, p_i] = i only away from the top level;
    the commutator defect lives entirely in the highest occupation block.
    """
    return _full_quadratures(cfg.n_modes, cfg.cutoff)


def build_hamiltonian(ham: QuadraticHamiltonian, t: float, cfg: FockConfig) -> np.ndarray:
    """Dense Hermitian operator (1/4) h_ab (xi^a xi^b + xi^b xi^a) + f_a xi^a.

    For symmetric h this equals (1/2) h_ab xi^a xi^b as an operator (the
    commutator term cancels against the antisymmetric form), but the
    symmetrized evaluation keeps the truncated matrix Hermitian by
    construction.
    """
    h = np.asarray(ham.h(t), dtype=float)
    if h.shape != (2 * cfg.n_modes, 2 * cfg.n_modes):
        raise DimensionMismatch(f"form is {h.shape}, config has {cfg.n_modes} modes")
    xi = build_quadratures(cfg)
    dim = cfg.dim
    op = np.zeros((dim, dim), dtype=complex)
    for a in range(2 * cfg.n_modes):
        row = h[a]
        if not np.any(row):
            continue
        acc = np.zeros((dim, dim), dtype=complex)
        for b in range(2 * cfg.n_modes):
            if row[b] != 0.0:
                acc += row[b] * xi[b]
        op += 0.5 * (xi[a] @ acc)
    op = 0.5 * (op + op.conj().T)
    if ham.f is not None:
        fvec = np.asarray(ham.f(t), dtype=float)
        for a in range(2 * cfg.n_modes):
            if fvec[a] != 0.0:
                op += fvec[a] * xi[a]
    defect = np.max(np.abs(op - op.conj().T))
    if defect > 1e-12 * (1.0 + np.max(np.abs(op))):
        raise NonHermitian(f"operator failed hermiticity check (defect {defect:.3g})")
    return op


@dataclass(frozen=True)
class FockState:
    """Complex amplitude tensor over the truncated number basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim < 1 or amp.ndim > 3:
            raise DimensionMismatch("amplitude tensor must have 1 to 3 axes")
        if len(set(amp.shape)) != 1:
            raise DimensionMismatch("all modes must share one cutoff")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockState":
        return FockState(self.amplitudes / self.norm)

    @classmethod
    def fock(cls, occupations, cutoff: int) -> "FockState":
        occupations = tuple(occupations)
        if any(not 0 <= n < cutoff for n in occupations):
            raise ValueError(f"occupations {occupations} exceed cutoff {cutoff}")
        amp = np.zeros((cutoff,) * len(occupations), dtype=complex)
        amp[occupations] = 1.0
        return cls(amp)

    @classmethod
    def superposition(cls, terms, cutoff: int, n_modes: int) -> "FockState":
        """Normalized sum of coeff * |occupations> terms."""
        amp = np.zeros((cutoff,) * n_modes, dtype=complex)
        for coeff, occ in terms:
            amp[tuple(occ)] += coeff
        state = cls(amp)
        if state.norm == 0:
            raise ValueError("superposition has zero norm")
        return state.normalized()

    @classmethod
    def coherent(cls, alphas, cutoff: int, tail_tol: float = 1e-8) -> "FockState":
        """Product of coherent states, one amplitude per mode."""
        vecs = []
        for alpha in np.atleast_1d(alphas):
            n = np.arange(cutoff)
            log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, cutoff)))])
            vec = np.exp(-0.5 * abs(alpha) ** 2) * alpha ** n / np.exp(0.5 * log_fact)
            tail = 1.0 - float(np.linalg.norm(vec) ** 2)
            if tail > tail_tol:
                raise ValueError(f"coherent amplitude {alpha} loses {tail:.3g} beyond cutoff {cutoff}")
            vecs.append(vec)
        amp = vecs[0]
        for vec in vecs[1:]:
            amp = np.multiply.outer(amp, vec)
        return cls(amp).normalized()

    @classmethod
    def cat(cls, alpha, cutoff: int, n_modes: int = 1, mode: int = 0) -> "FockState":
        """Even cat (|alpha> + |-alpha>)/norm in one mode, vacuum elsewhere."""
        plus = cls.coherent([alpha], cutoff).amplitudes
        minus = cls.coherent([-alpha], cutoff).amplitudes
        local = plus + minus
        local = local / np.linalg.norm(local)
        vac = np.zeros(cutoff, dtype=complex)
        vac[0] = 1.0
        amp = None
        for m in range(n_modes):
            vec = local if m == mode else vac
            amp = vec if amp is None else np.multiply.outer(amp, vec)
        return cls(amp)


def top_level_population(state: FockState) -> float:
    """Largest population of the top two levels over all modes."""
    prob = np.abs(state.amplitudes) ** 2
    worst = 0.0
    for mode in range(state.n_modes):
        moved = np.moveaxis(prob, mode, 0)
        worst = max(worst, float(moved[-2:].sum()))
    return worst


@dataclass
class FockTrajectory:
    """Sampled oracle evolution with trust flags per sample."""

    times: np.ndarray
    states: list
    leaks: np.ndarray
    trusted: np.ndarray
    config: FockConfig = field(repr=False, default=None)

    @property
    def trusted_until(self) -> float:
        idx = np.nonzero(self.trusted)[0]
        return float(self.times[idx[-1]]) if len(idx) else 0.0

    def state_at(self, t: float) -> FockState:
        return self.states[int(np.argmin(np.abs(self.times - t)))]


def evolve_fock(psi0: FockState, ham: QuadraticHamiltonian, t_final: float,
                cfg: FockConfig, store_every: int = 1) -> FockTrajectory:
    """Propagate by per-step unitaries exp(-i dt H(t_mid)).

    Each step's exponential comes from an eigendecomposition of the
    Hermitian step operator, so unitarity holds to roundoff.  For a
    time-independent Hamiltonian the step propagator is diagonalized once.
    Once the top-level population exceeds the ceiling, all later samples
    are flagged untrusted; an initial state already over the ceiling is
    rejected outright.
    """
    if psi0.n_modes != cfg.n_modes or psi0.cutoff != cfg.cutoff:
        raise DimensionMismatch("state shape does not match config")
    if abs(psi0.norm - 1.0) > 1e-8:
        raise ValueError(f"initial state norm {psi0.norm} not 1")
    if top_level_population(psi0) > cfg.leak_ceiling:
        raise TruncationLeak("initial state already exceeds the leak ceiling; raise the cutoff")

    n_steps = max(1, int(round(t_final / cfg.dt)))
    dt = t_final / n_steps
    shape = psi0.amplitudes.shape

    def step_unitary(t_mid):
        op = build_hamiltonian(ham, t_mid, cfg)
        evals, evecs = np.linalg.eigh(op)
        return (evecs * np.exp(-1j * dt * evals)) @ evecs.conj().T

    u_const = None if ham.time_dependent else step_unitary(0.5 * dt)

    psi = psi0.amplitudes.ravel().copy()
    state0 = FockState(psi.reshape(shape))
    times = [0.0]
    states = [state0]
    leaks = [top_level_population(state0)]
    trusted_flags = [True]
    leaked = False

    t = 0.0
    for k in range(1, n_steps + 1):
        u = u_const if u_const is not None else step_unitary(t + 0.5 * dt)
        psi = u @ psi
        t = k * dt
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > 1e-8 * max(t, 1.0):
            raise RuntimeError(f"norm drift {drift:.3g} at t={t:.6g}; step unitary is broken")
        if k % store_every == 0 or k == n_steps:
            state = FockState(psi.reshape(shape))
            lk = top_level_population(state)
            leaked = leaked or lk > cfg.leak_ceiling
            times.append(t)
            states.append(state)
            leaks.append(lk)
            trusted_flags.append(not leaked)
    return FockTrajectory(times=np.array(times), states=states, leaks=np.array(leaks),
                          trusted=np.array(trusted_flags, dtype=bool), config=cfg)


def _schmidt_values(state: FockState, modes_a):
    modes_a = tuple(modes_a)
    n = state.n_modes
    modes_b = tuple(m for m in range(n) if m not in modes_a)
    if not modes_a or not modes_b or len(set(modes_a)) != len(modes_a):
        raise ValueError(f"bad subsystem modes {modes_a} of {n}")
    perm = modes_a + modes_b
    tensor = np.transpose(state.amplitudes, perm)
    d = state.cutoff
    return np.linalg.svd(tensor.reshape(d ** len(modes_a), d ** len(modes_b)),
                         compute_uv=False)


def reduced_entropy(state: FockState, modes_a) -> float:
    """Entanglement entropy of the given modes from the Schmidt spectrum."""
    sv = _schmidt_values(state, modes_a)
    probs = sv ** 2
    probs = probs[probs > 1e-300]
    return float(-np.sum(probs * np.log(probs)))


def reduced_renyi2(state: FockState, modes_a) -> float:
    """Renyi-2 entropy -ln tr rho_A^2 of the reduced state."""
    sv = _schmidt_values(state, modes_a)
    return float(-np.log(np.sum(sv ** 4)))


def covariance_of(state: FockState, leak_ceiling: Optional[float] = None):
    """First and second quadrature moments: returns (covariance, displacement).

    The covariance follows the symmetrized-product convention with the
    vacuum normalized to the identity.  The result is validity-checked with
    an uncertainty slack widened by the measured top-level population:
    chopping the amplitude tail can push the moments below the bound by an
    amount of the truncation size.
    """
    leak = top_level_population(state)
    if leak_ceiling is not None and leak > leak_ceiling:
        raise TruncationLeak("top-level population above ceiling; moments untrusted")
    xi = _full_quadratures(state.n_modes, state.cutoff)
    psi = state.amplitudes.ravel()
    applied = [op @ psi for op in xi]
    dim = 2 * state.n_modes
    z = np.array([np.real(np.vdot(psi, applied[a])) for a in range(dim)])
    g = np.empty((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            g[a, b] = g[b, a] = 2.0 * np.real(np.vdot(applied[a], applied[b])) - 2.0 * z[a] * z[b]
    require_valid_covariance(g, uncertainty_slack=max(1e-9, 100.0 * leak))
    return g, z


@dataclass(frozen=True)
class GrowthReport:
    """Slope of the oracle entanglement entropy over its trusted window."""

    fit: SlopeFit
    trusted_until: float
    window: tuple
    lambda_ref: Optional[float] = None
    times: np.ndarray = None
    entropies: np.ndarray = None

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def stderr(self) -> float:
        return self.fit.stderr


def verify_linear_growth(psi0: FockState, ham: QuadraticHamiltonian, modes_a, cfg: FockConfig,
                         t_final: float, window: Optional[tuple] = None,
                         window_fraction: float = 0.75, store_every: int = 1,
                         lambda_ref: Optional[float] = None,
                         min_points: int = 6) -> GrowthReport:
    """Fit the entropy growth rate over the trusted window.

    If no explicit window is given, the fit runs over the last
    ``1 - window_fraction`` of the trusted horizon; the early part is
    discarded as transient.  Window choice is heuristic and always
    reported in the result, never assumed downstream.
    """
    traj = evolve_fock(psi0, ham, t_final, cfg, store_every=store_every)
    entropies = np.array([reduced_entropy(s, modes_a) for s in traj.states])
    t_trust = traj.trusted_until
    if window is None:
        window = (window_fraction * t_trust, t_trust)
    lo, hi = window
    hi = min(hi, t_trust)
    mask = traj.trusted
    t_w, s_w = windowed(traj.times[mask], entropies[mask], lo, hi)
    if len(t_w) < min_points:
        raise WindowTooShort(
            f"only {len(t_w)} trusted samples in [{lo:.3g}, {hi:.3g}] "
            f"(trusted until {t_trust:.3g}); raise the cutoff or shorten the transient")
    fit = fit_slope(t_w, s_w)
    return GrowthReport(fit=fit, trusted_until=t_trust, window=(float(lo), float(hi)),
                        lambda_ref=lambda_ref, times=traj.times, entropies=entropies)
