"""Periodically driven finite-dimensional systems.

A T-periodic Hamiltonian H(t) defines the monodromy U(T) (time-ordered
product over one period).  Its eigenpairs give the quasienergies
eps = -(hbar/T) arg(lambda), defined modulo hbar*omega and folded to the
principal zone [-hbar*omega/2, hbar*omega/2), and the Floquet modes phi(0).
Trajectories phi(t) = U(t,0) phi(0) factor into exp(-i eps t/hbar) times a
T-periodic part v(t), the temporal analogue of a cell-periodic Bloch factor.

Two independent routes are kept deliberately: the default propagator is the
midpoint-exponential product (every factor exactly unitary), cross-checked
by a classical fourth-order Runge-Kutta integrator with re-unitarization
off, and the propagator quasienergies are cross-checked against the
time-Fourier block eigenproblem on the extended space.

The temporal-overlap probe reports three quantities for a pair of modes with
quasienergy splitting Delta: the one-period phase relation
F(t+T) = exp(i Delta T/hbar) F(t) of F(t) = <phi_j(t)|O(t)|phi_j'(t)>, the
decay of the K-period running average of F against the numerically evaluated
geometric-sum bound, and the instantaneous element at t=0 for an observable
built as a real polynomial in U(T) and its adjoint (which commutes with the
monodromy, forcing the element to vanish).  Instantaneous vanishing for
generic periodic observables is NOT claimed: for those the suppression shows
up as the averaged decay.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import NumericalFailure

MIN_DIM, MAX_DIM = 2, 16
MIN_STEPS = 64
HERMITICITY_ATOL = 1e-12
UNITARITY_LIMIT = 1e-6  # propagation aborts beyond this drift
DEGENERATE_SPLITTING = 1e-8

_VALID_KINDS = ("cos", "sin")


def _require_hermitian(matrix: np.ndarray, what: str) -> np.ndarray:
    m = np.array(matrix, dtype=complex)  # own copy; frozen below
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    scale = max(float(np.max(np.abs(m))), 1.0)
    if float(np.max(np.abs(m - m.conj().T))) > HERMITICITY_ATOL * scale:
        raise ValueError(f"{what} is not Hermitian")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class DriveTerm:
    """One harmonic drive: matrix times cos or sin of (harmonic * omega * t)."""

    harmonic: int
    kind: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.harmonic < 1:
            raise ValueError("drive harmonic must be >= 1")
        if self.kind not in _VALID_KINDS:
            raise ValueError(f"drive kind must be one of {_VALID_KINDS}")
        object.__setattr__(self, "matrix", _require_hermitian(self.matrix, "drive matrix"))


@dataclass(frozen=True)
class DriveSpec:
    """T-periodic Hamiltonian H(t) = H0 + sum_i trig(h_i omega t) V_i."""

    h0: np.ndarray
    omega: float
    drives: tuple[DriveTerm, ...] = ()
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "h0", _require_hermitian(self.h0, "static Hamiltonian"))
        if not MIN_DIM <= self.dim <= MAX_DIM:
            raise ValueError(f"dimension must lie in [{MIN_DIM}, {MAX_DIM}]")
        if self.omega <= 0 or self.hbar <= 0:
            raise ValueError("omega and hbar must be positive")
        for term in self.drives:
            if term.matrix.shape != self.h0.shape:
                raise ValueError("drive matrix dimension differs from H0")

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def hamiltonian(self, t: float) -> np.ndarray:
        h = np.array(self.h0)
        for term in self.drives:
            phase = term.harmonic * self.omega * t
            factor = np.cos(phase) if term.kind == "cos" else np.sin(phase)
            h = h + factor * term.matrix
        return h

    def fourier_blocks(self) -> dict[int, np.ndarray]:
        """Components H_q of H(t) = sum_q H_q exp(i q omega t)."""
        d = self.dim
        blocks: dict[int, np.ndarray] = {0: np.array(self.h0, dtype=complex)}
        for term in self.drives:
            plus = blocks.setdefault(term.harmonic, np.zeros((d, d), dtype=complex))
            minus = blocks.setdefault(-term.harmonic, np.zeros((d, d), dtype=complex))
            if term.kind == "cos":
                plus += 0.5 * term.matrix
                minus += 0.5 * term.matrix
            else:
                plus += -0.5j * term.matrix
                minus += 0.5j * term.matrix
        return blocks


@dataclass(frozen=True)
class PeriodicObservableSpec:
    """T-periodic observable O(t) = O0 + sum trig(h omega t) V, Hermitian at all t."""

    static: np.ndarray
    harmonics: tuple[DriveTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "static", _require_hermitian(self.static, "static part"))
        for term in self.harmonics:
            if term.matrix.shape != self.static.shape:
                raise ValueError("harmonic matrix dimension differs from static part")

    def value(self, t: float, omega: float) -> np.ndarray:
        o = np.array(self.static)
        for term in self.harmonics:
            phase = term.harmonic * omega * t
            factor = np.cos(phase) if term.kind == "cos" else np.sin(phase)
            o = o + factor * term.matrix
        return o


@dataclass(frozen=True)
class FloquetSolution:
    """Monodromy and (optionally) quasienergies, modes, and trajectories."""

    spec: DriveSpec
    method: str
    steps: int
    monodromy: np.ndarray
    quasienergies: np.ndarray | None = None
    modes: np.ndarray | None = None  # columns phi_j(0), orthonormal
    times: np.ndarray | None = None
    trajectories: np.ndarray | None = None  # [mode, time, component]
    periodic_parts: np.ndarray | None = None
    periodicity_residuals: np.ndarray | None = None

    @property
    def unitarity_defect(self) -> float:
        u = self.monodromy
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class TemporalOverlapReport:
    """The three honest quantities probed for a mode pair (j, jp)."""

    pair: tuple[int, int]
    splitting: float  # eps_j - eps_jp
    grid_points: int
    phase_relation_residual: float
    period_averages: tuple[tuple[int, float], ...]  # (K, |avg over [0, K T]|)
    geometric_bounds: tuple[tuple[int, float], ...]
    bound_coefficient: float  # fitted C with |avg_K| <= C / K
    monodromy_commuting_element: float  # |F(0)| for the U(T)-polynomial observable


def _step_unitary(h: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    """exp(-i H dt / hbar) through the eigendecomposition; exactly unitary."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * dt / hbar)) @ vecs.conj().T


def _midpoint_factors(spec: DriveSpec, steps: int) -> list[np.ndarray]:
    dt = spec.period / steps
    return [
        _step_unitary(spec.hamiltonian((s + 0.5) * dt), dt, spec.hbar)
        for s in range(steps)
    ]


def _propagate_midpoint(spec: DriveSpec, steps: int) -> np.ndarray:
    u = np.eye(spec.dim, dtype=complex)
    for factor in _midpoint_factors(spec, steps):
        u = factor @ u
    return u


def _propagate_rk4(spec: DriveSpec, steps: int) -> np.ndarray:
    """Classical RK4 on U' = -(i/hbar) H(t) U, no re-unitarization."""
    dt = spec.period / steps
    scale = -1j / spec.hbar
    u = np.eye(spec.dim, dtype=complex)
    for s in range(steps):
        t = s * dt
        k1 = scale * (spec.hamiltonian(t) @ u)
        k2 = scale * (spec.hamiltonian(t + 0.5 * dt) @ (u + 0.5 * dt * k1))
        k3 = scale * (spec.hamiltonian(t + 0.5 * dt) @ (u + 0.5 * dt * k2))
        k4 = scale * (spec.hamiltonian(t + dt) @ (u + dt * k3))
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def propagate_period(
    spec: DriveSpec, steps: int = 4096, method: str = "midpoint-exponential"
) -> FloquetSolution:
    """Monodromy U(T) by the chosen integrator.

    Raises NumericalFailure when the result drifts off the unitary group by
    more than 1e-6 (advice: increase ``steps``).
    """
    if steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} steps, got {steps}")
    if method in ("midpoint-exponential", "midpoint"):
        u = _propagate_midpoint(spec, steps)
        method = "midpoint-exponential"
    elif method in ("fourth-order", "rk4"):
        u = _propagate_rk4(spec, steps)
        method = "fourth-order"
    else:
        raise ValueError(f"unknown method {method!r}")
    drift = float(np.max(np.abs(u.conj().T @ u - np.eye(spec.dim))))
    if drift > UNITARITY_LIMIT:
        raise NumericalFailure(
            f"monodromy unitarity drift {drift:.3e} exceeds {UNITARITY_LIMIT:.0e}; "
            "increase steps"
        )
    return FloquetSolution(spec=spec, method=method, steps=steps, monodromy=u)


def fold_quasienergy(value: float | np.ndarray, omega: float, hbar: float = 1.0):
    """Map quasienergies to the principal zone [-hbar*omega/2, hbar*omega/2)."""
    zone = hbar * omega
    return ((np.asarray(value) + 0.5 * zone) % zone) - 0.5 * zone


def quasienergies(
    monodromy: np.ndarray, omega: float, hbar: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Quasienergies and Floquet modes of a monodromy matrix.

    Uses the complex Schur form (diagonal for a unitary matrix) so the modes
    come out orthonormal even inside degenerate clusters.  Output is sorted
    by ascending quasienergy; clusters are canonicalized and every mode is
    phased with its largest coefficient real positive, making the result
    deterministic.
    """
    u = np.asarray(monodromy, dtype=complex)
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if defect > 1e-8:
        raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
    t, z = scipy.linalg.schur(u, output="complex")
    lams = np.diag(t)
    residual = float(np.max(np.abs(t - np.diag(lams))))
    if residual > 1e-8:
        raise NumericalFailure(f"Schur form of monodromy not diagonal: {residual:.3e}")
    period = 2.0 * np.pi / omega
    eps = fold_quasienergy(-(hbar / period) * np.angle(lams), omega, hbar)
    order = np.argsort(eps, kind="stable")
    eps = eps[order]
    modes = z[:, order]
    modes = _canonicalize_modes(eps, modes, hbar * omega)
    return eps, modes


def _canonicalize_modes(eps: np.ndarray, modes: np.ndarray, zone: float) -> np.ndarray:
    from .bloch import _canonical_eigenbasis  # same gauge rules as the lattice solver

    return _canonical_eigenbasis(eps / max(zone, 1e-300), modes)


def solve_floquet(
    spec: DriveSpec, steps: int = 4096, method: str = "midpoint-exponential"
) -> FloquetSolution:
    """propagate_period followed by the quasienergy extraction."""
    sol = propagate_period(spec, steps=steps, method=method)
    eps, modes = quasienergies(sol.monodromy, spec.omega, spec.hbar)
    return replace(sol, quasienergies=eps, modes=modes)


def sambe_quasienergies(spec: DriveSpec, h_max: int = 12) -> np.ndarray:
    """Quasienergies from the time-Fourier block eigenproblem.

    Builds K[(h),(h')] = H_{h-h'} + delta_{hh'} h hbar omega on the extended
    space truncated at |h| <= h_max, folds the spectrum to the principal
    zone, and returns the dim values whose eigenvectors carry the most
    weight in the central (h = 0) block, sorted ascending.  These converge
    to the propagator quasienergies as h_max grows.
    """
    if h_max < 4:
        raise ValueError("need h_max >= 4")
    d = spec.dim
    blocks = spec.fourier_blocks()
    n_blocks = 2 * h_max + 1
    big = np.zeros((d * n_blocks, d * n_blocks), dtype=complex)
    for bi, h in enumerate(range(-h_max, h_max + 1)):
        for bj, hp in enumerate(range(-h_max, h_max + 1)):
            q = h - hp
            if q in blocks:
                big[bi * d : (bi + 1) * d, bj * d : (bj + 1) * d] = blocks[q]
        big[bi * d : (bi + 1) * d, bi * d : (bi + 1) * d] += (
            h * spec.hbar * spec.omega * np.eye(d)
        )
    vals, vecs = np.linalg.eigh(big)
    central = h_max * d
    weights = np.sum(np.abs(vecs[central : central + d, :]) ** 2, axis=0)
    chosen = np.sort(np.argsort(-weights, kind="stable")[:d])
    folded = fold_quasienergy(vals[chosen], spec.omega, spec.hbar)
    return np.sort(folded)


def mode_trajectory(
    spec: DriveSpec, solution: FloquetSolution, n_t: int = 257
) -> FloquetSolution:
    """Sample phi_j(t) and v_j(t) = exp(i eps_j t/hbar) phi_j(t) over [0, T].

    The grid has n_t points including both endpoints.  For the periodicity
    residual || v(T) - v(0) || to reflect only integration accuracy, n_t - 1
    should divide the solution's step count (the default 257 matches 4096
    steps); otherwise the step count is rounded up to the next multiple.
    """
    if n_t < 2:
        raise ValueError("need at least 2 grid points")
    if solution.quasienergies is None or solution.modes is None:
        eps, modes = quasienergies(solution.monodromy, spec.omega, spec.hbar)
        solution = replace(solution, quasienergies=eps, modes=modes)
    eps, modes = solution.quasienergies, solution.modes
    segments = n_t - 1
    per_segment = max(1, -(-solution.steps // segments))  # ceil division
    dt = spec.period / (segments * per_segment)
    times = np.linspace(0.0, spec.period, n_t)
    d = spec.dim
    trajectories = np.empty((d, n_t, d), dtype=complex)
    trajectories[:, 0, :] = modes.T
    u = np.eye(d, dtype=complex)
    step = 0
    for seg in range(segments):
        for _ in range(per_segment):
            h = spec.hamiltonian((step + 0.5) * dt)
            u = _step_unitary(h, dt, spec.hbar) @ u
            step += 1
        trajectories[:, seg + 1, :] = (u @ modes).T
    phase = np.exp(1j * np.outer(eps, times) / spec.hbar)  # [mode, time]
    periodic_parts = trajectories * phase[:, :, None]
    residuals = np.linalg.norm(periodic_parts[:, -1, :] - periodic_parts[:, 0, :], axis=1)
    return replace(
        solution,
        times=times,
        trajectories=trajectories,
        periodic_parts=periodic_parts,
        periodicity_residuals=residuals,
    )


def floquet_expansion(state: np.ndarray, solution: FloquetSolution) -> np.ndarray:
    """Coefficients of a state in the Floquet-mode basis at t = 0."""
    if solution.modes is None:
        raise ValueError("solution has no modes; call solve_floquet or quasienergies")
    return solution.modes.conj().T @ np.asarray(state, dtype=complex)


def monodromy_polynomial(
    monodromy: np.ndarray, coefficients: tuple[float, ...] = (0.4, 0.3, 0.2)
) -> np.ndarray:
    """Hermitian observable c0 I + sum_r c_r (U^r + U^dagger^r).

    By construction it commutes with U(T), so its matrix elements between
    Floquet modes of distinct monodromy eigenvalues vanish identically.
    """
    d = monodromy.shape[0]
    out = coefficients[0] * np.eye(d, dtype=complex)
    power = np.eye(d, dtype=complex)
    for c in coefficients[1:]:
        power = power @ monodromy
        out = out + c * (power + power.conj().T)
    return out


def temporal_overlap_probe(
    spec: DriveSpec,
    solution: FloquetSolution,
    observable: PeriodicObservableSpec,
    pair: tuple[int, int] = (0, 1),
    periods: tuple[int, ...] = (8, 16, 32, 64),
    grid_points: int = 256,
) -> TemporalOverlapReport:
    """Probe the cross-quasienergy overlap F(t) = <phi_j(t)|O(t)|phi_j'(t)>.

    See the module docstring for the three reported quantities.  The pair
    must be non-degenerate modulo hbar*omega (beyond 1e-8), otherwise the
    splitting phase is undefined and the probe is rejected.
    """
    j, jp = pair
    if j == jp:
        raise ValueError("need two distinct mode indices")
    if not periods:
        raise ValueError("need at least one period count")
    if grid_points < 8:
        raise ValueError("need at least 8 grid points per period")
    if solution.quasienergies is None or solution.modes is None:
        eps, modes = quasienergies(solution.monodromy, spec.omega, spec.hbar)
        solution = replace(solution, quasienergies=eps, modes=modes)
    eps, modes = solution.quasienergies, solution.modes
    delta = float(eps[j] - eps[jp])
    folded = float(np.abs(fold_quasienergy(delta, spec.omega, spec.hbar)))
    if folded <= DEGENERATE_SPLITTING:
        raise ValueError(
            f"modes {pair} are quasienergy-degenerate modulo hbar*omega "
            f"(splitting {folded:.3e})"
        )
    period = spec.period
    steps = solution.steps
    per_point = max(1, -(-steps // grid_points))
    dt = period / (grid_points * per_point)
    d = spec.dim

    # snapshots of U(t_i, 0) on the grid t_i = i * T / grid_points (t < T)
    snapshots = np.empty((grid_points, d, d), dtype=complex)
    u = np.eye(d, dtype=complex)
    step = 0
    for i in range(grid_points):
        snapshots[i] = u
        for _ in range(per_point):
            h = spec.hamiltonian((step + 0.5) * dt)
            u = _step_unitary(h, dt, spec.hbar) @ u
            step += 1
    u_period = u

    obs_grid = np.empty((grid_points, d, d), dtype=complex)
    for i in range(grid_points):
        obs_grid[i] = observable.value(i * period / grid_points, spec.omega)

    phi_j0, phi_jp0 = modes[:, j], modes[:, jp]

    def overlaps(vec_j: np.ndarray, vec_jp: np.ndarray) -> np.ndarray:
        left = snapshots @ vec_j  # [grid, d]
        right = snapshots @ vec_jp
        return np.einsum("id,idk,ik->i", left.conj(), obs_grid, right)

    f_first = overlaps(phi_j0, phi_jp0)
    f_second = overlaps(u_period @ phi_j0, u_period @ phi_jp0)
    z = np.exp(1j * delta * period / spec.hbar)
    phase_residual = float(np.max(np.abs(f_second - z * f_first)))

    # running averages over [0, K T]: modes advanced period by period
    max_k = max(periods)
    running = 0j
    averages: dict[int, float] = {}
    vec_j, vec_jp = phi_j0.copy(), phi_jp0.copy()
    wanted = set(periods)
    for k in range(1, max_k + 1):
        if k == 1:
            running += np.sum(f_first)
        else:
            running += np.sum(overlaps(vec_j, vec_jp))
        if k in wanted:
            averages[k] = float(abs(running / (k * grid_points)))
        vec_j = u_period @ vec_j
        vec_jp = u_period @ vec_jp

    mean_first = complex(np.mean(f_first))
    bounds: dict[int, float] = {}
    for k in periods:
        geom = abs((1.0 - z**k) / (1.0 - z))
        bounds[k] = float(geom * abs(mean_first) / k)
    coefficient = max(k * averages[k] for k in periods)

    commuting = monodromy_polynomial(solution.monodromy)
    f0 = complex(phi_j0.conj() @ commuting @ phi_jp0)

    return TemporalOverlapReport(
        pair=(j, jp),
        splitting=delta,
        grid_points=grid_points,
        phase_relation_residual=phase_residual,
        period_averages=tuple(sorted(averages.items())),
        geometric_bounds=tuple(sorted(bounds.items())),
        bound_coefficient=float(coefficient),
        monodromy_commuting_element=abs(f0),
    )
