"""Joint diagonalization of the lattice Hamiltonian and the translation.

Because a cell-periodic Hamiltonian couples only plane waves within one
wavevector class, diagonalizing each class block yields simultaneous
eigenvectors of H and of the translation operator T: the class label l fixes
the translation eigenvalue exp(i k_l a) with k_l = 2*pi*l/(N*a), and sorting
each block's eigenvalues defines the band index n = 0, 1, ... (one state per
class and band, so every band holds N states).

Eigenvector gauge is pinned deterministically: degenerate clusters are
re-spanned by greedy pivoting of the cluster projector onto plane-wave axes
(ordered by the plane-wave index of the dominant coefficient), and every
vector is phased so its largest-magnitude coefficient is real positive.
Repeat runs are then bitwise comparable on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, NumericalFailure
from .lattice import HermitianOperator, LatticeSpec, PlaneWaveBasis, build_basis

DEGENERACY_ATOL = 1e-10
SUPPORT_ATOL = 1e-12

# winding extraction: phase steps at or beyond this are treated as undersampled
MAX_PHASE_STEP = np.pi / 2
MIN_SAMPLE_MODULUS = 0.5


@dataclass(frozen=True)
class BlochState:
    """Simultaneous eigenstate of H and T.

    ``coeffs`` is the full-dimension coefficient vector in the plane-wave
    basis, supported only on indices m with m mod N == sector.
    """

    band: int
    sector: int
    wavevector: float
    energy: float
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)  # own copy; frozen
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True)
class CellPeriodicState:
    """The cell-periodic factor u of a Bloch state.

    Coefficients live on reciprocal-lattice momenta G_j = 2*pi*j/a; the
    original state is exp(i k x) u(x), which at the coefficient level is the
    index shift m = sector + j*N.
    """

    band: int
    sector: int
    wavevector: float
    energy: float
    g_indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        for name, dtype in (("g_indices", int), ("coeffs", complex)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class BandStructure:
    """Energies E[sector, band] with k_values[sector], bands sorted ascending."""

    k_values: np.ndarray
    energies: np.ndarray

    def __post_init__(self):
        for name in ("k_values", "energies"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def sectors(self) -> int:
        return self.energies.shape[0]

    @property
    def bands(self) -> int:
        return self.energies.shape[1]

    def rows(self):
        """Yield (sector, k, band, energy) in lexicographic order."""
        for sector in range(self.sectors):
            for band in range(self.bands):
                yield sector, float(self.k_values[sector]), band, float(
                    self.energies[sector, band]
                )


def _phase_fix(vec: np.ndarray) -> np.ndarray:
    """Rotate a unit vector so its largest-magnitude entry is real positive."""
    pivot = int(np.argmax(np.abs(vec)))
    z = vec[pivot]
    if abs(z) == 0.0:
        return vec
    return vec * (np.conj(z) / abs(z))


def _canonicalize_cluster(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis for a degenerate eigenspace.

    Works on the basis-independent projector: repeatedly pick the axis with
    the largest remaining diagonal weight, normalize its projection, deflate.
    The resulting vectors are then ordered by the plane-wave row of their
    dominant coefficient.
    """
    size = vectors.shape[1]
    if size == 1:
        return vectors
    proj = vectors @ vectors.conj().T
    picked = []
    residual = proj.copy()
    for _ in range(size):
        pivot = int(np.argmax(np.real(np.diag(residual))))
        col = residual[:, pivot]
        nrm = np.linalg.norm(col)
        if nrm < 1e-8:
            raise NumericalFailure("degenerate-cluster pivoting lost rank")
        vec = col / nrm
        picked.append(vec)
        residual = residual - np.outer(vec, vec.conj())
    picked.sort(key=lambda v: int(np.argmax(np.abs(v))))
    return np.column_stack(picked)


def _canonical_eigenbasis(energies: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Apply cluster canonicalization and phase fixing to eigh output."""
    scale = max(1.0, float(np.max(np.abs(energies))) if energies.size else 1.0)
    atol = DEGENERACY_ATOL * scale
    out = vectors.copy()
    start = 0
    n = len(energies)
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] < atol:
            stop += 1
        if stop - start > 1:
            out[:, start:stop] = _canonicalize_cluster(out[:, start:stop])
        start = stop
    for i in range(n):
        out[:, i] = _phase_fix(out[:, i])
    return out


def solve_bands(
    h: HermitianOperator, spec: LatticeSpec
) -> tuple[BandStructure, list[BlochState]]:
    """Diagonalize every wavevector-class block of a cell-periodic H.

    Returns the band table and the full list of Bloch states, ordered by
    (sector, band).  Raises InvariantViolation if H carries weight between
    different classes (it then is not cell-periodic and has no common
    eigenbasis with T), and NumericalFailure if a block eigensolve fails.
    """
    basis = build_basis(spec)
    if h.dim != basis.dim:
        raise ValueError(f"operator dimension {h.dim} does not match basis {basis.dim}")
    _require_block_structure(h, basis)

    n_cells = spec.cells
    bands_per_class = basis.dim // n_cells
    k_values = np.array([basis.wavevector(l) for l in range(n_cells)])
    energies = np.zeros((n_cells, bands_per_class))
    states: list[BlochState] = []
    for sector in range(n_cells):
        rows = basis.class_rows(sector)
        block = h.matrix[np.ix_(rows, rows)]
        try:
            vals, vecs = np.linalg.eigh(block)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NumericalFailure(f"eigensolver failed in class {sector}: {exc}") from exc
        vecs = _canonical_eigenbasis(vals, vecs)
        energies[sector] = vals
        for band in range(bands_per_class):
            full = np.zeros(basis.dim, dtype=complex)
            full[rows] = vecs[:, band]
            states.append(
                BlochState(
                    band=band,
                    sector=sector,
                    wavevector=float(k_values[sector]),
                    energy=float(vals[band]),
                    coeffs=full,
                )
            )
    return BandStructure(k_values=k_values, energies=energies), states


def _require_block_structure(h: HermitianOperator, basis: PlaneWaveBasis) -> None:
    classes = basis.indices % basis.cells
    off_class = classes[:, None] != classes[None, :]
    leakage = float(np.max(np.abs(h.matrix[off_class]))) if off_class.any() else 0.0
    if leakage > SUPPORT_ATOL * max(h.norm_max, 1.0):
        raise InvariantViolation(
            f"operator couples different wavevector classes (leakage {leakage:.3e})"
        )


def cell_periodic_part(state: BlochState, basis: PlaneWaveBasis) -> CellPeriodicState:
    """Strip the exp(i k x) factor off a Bloch state.

    Pure reindexing m -> j = (m - sector)/N onto reciprocal-lattice harmonics,
    so the norm is preserved exactly.  Raises ValueError if the state carries
    weight outside its declared class.
    """
    n_cells = basis.cells
    rows = basis.class_rows(state.sector)
    mask = np.ones(basis.dim, dtype=bool)
    mask[rows] = False
    stray = float(np.max(np.abs(state.coeffs[mask]))) if mask.any() else 0.0
    if stray > SUPPORT_ATOL:
        raise ValueError(
            f"state support inconsistent with class {state.sector}: "
            f"off-class weight {stray:.3e}"
        )
    members = basis.indices[rows]
    g_indices = (members - state.sector) // n_cells
    return CellPeriodicState(
        band=state.band,
        sector=state.sector,
        wavevector=state.wavevector,
        energy=state.energy,
        g_indices=g_indices.astype(int),
        coeffs=state.coeffs[rows].copy(),
    )


def winding_number(samples: np.ndarray) -> int:
    """Winding of a unimodular function sampled on equally spaced ring points.

    Sums nearest-branch phase increments around the closed loop and rounds
    the total to the nearest integer.  Guards: every sample must stay away
    from the origin (|f| >= 0.5), and every step must stay below pi/2,
    otherwise the sampling is too coarse to identify the branch.
    """
    z = np.asarray(samples, dtype=complex)
    if z.ndim != 1 or len(z) < 8:
        raise ValueError("need a 1-d array of at least 8 ring samples")
    moduli = np.abs(z)
    if float(np.min(moduli)) < MIN_SAMPLE_MODULUS:
        raise ValueError(
            f"degenerate input: sample modulus {np.min(moduli):.3g} below "
            f"{MIN_SAMPLE_MODULUS}; phase is ill-defined"
        )
    steps = np.angle(np.roll(z, -1) / z)
    worst = float(np.max(np.abs(steps)))
    if worst >= MAX_PHASE_STEP:
        raise ValueError(
            f"phase step {worst:.3f} rad reaches pi/2: sampling too coarse "
            "for branch tracking"
        )
    total = float(np.sum(steps)) / (2.0 * np.pi)
    nearest = int(round(total))
    if abs(total - nearest) > 0.25:
        raise NumericalFailure(f"winding sum {total:.6f} is not close to an integer")
    return nearest


def ring_phase_samples(winding: int, points: int) -> np.ndarray:
    """Samples of exp(i k_l x) on the ring; for class l this is winding l."""
    p = np.arange(points)
    return np.exp(2j * np.pi * winding * p / points)


def wannier_state(
    band: int, home_cell: int, states: list[BlochState], spec: LatticeSpec
) -> np.ndarray:
    """Localized combination of all same-band Bloch states.

    w_{n,r} = N^{-1/2} sum_l exp(-i k_l r a) psi_{n k_l}.  The inverse of the
    translation operator advances the home cell: T^dagger w_{n,r} = w_{n,r+1}
    (T itself maps w_{n,r} to w_{n,r-1}, indices mod N).  Unit norm follows
    from orthonormality of the Bloch states.
    """
    n_cells = spec.cells
    by_sector = {s.sector: s for s in states if s.band == band}
    missing = [l for l in range(n_cells) if l not in by_sector]
    if missing:
        raise ValueError(f"band {band} is missing wavevector classes {missing}")
    dim = len(by_sector[0].coeffs)
    out = np.zeros(dim, dtype=complex)
    shift = home_cell * spec.a
    for sector in range(n_cells):
        state = by_sector[sector]
        out += np.exp(-1j * state.wavevector * shift) * state.coeffs
    return out / np.sqrt(n_cells)
