"""Cross-sector coherence measurements.

The central structural fact under test: for any cell-periodic observable O
and Bloch states with different wavevectors, the matrix element
<psi_{m k_j} | O | psi_{n k_l}> vanishes, so superpositions across
wavevector classes show no interference fringes and are indistinguishable
from the 50/50 classical mixture by every valid measurement.  Within one
class coherence is real and the fringes are there; deliberately
periodicity-breaking operators restore cross-class fringes.  Both controls
are part of the battery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import BlochState
from .lattice import HermitianOperator

ORTHOGONALITY_ATOL = 1e-10
DEGENERATE_NORM_ATOL = 1e-12


@dataclass(frozen=True)
class OverlapRecord:
    """One evaluated matrix element between two Bloch states."""

    bra_band: int
    bra_sector: int
    bra_wavevector: float
    ket_band: int
    ket_sector: int
    ket_wavevector: float
    observable: str
    value: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class FringeScan:
    """Observable average against the relative phase of a superposition."""

    phases: np.ndarray
    averages: np.ndarray
    observable: str = ""

    def __post_init__(self):
        for name in ("phases", "averages"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def amplitude(self) -> float:
        return float(np.max(self.averages) - np.min(self.averages))

    @property
    def mean_level(self) -> float:
        return float(np.mean(self.averages))


@dataclass(frozen=True)
class MixtureDiagnostic:
    """Superposition-vs-mixture density matrices and their separability.

    ``distinguishability`` is max over the battery of
    |Tr((rho_sup - rho_mix) O)| / ||O||_max; zero means no valid measurement
    tells the equal-weight superposition from the classical mixture.
    """

    rho_superposition: np.ndarray
    rho_mixture: np.ndarray
    distinguishability: float
    per_observable: tuple[tuple[str, float], ...]

    def __post_init__(self):
        for name in ("rho_superposition", "rho_mixture"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class SectorDecompositionReport:
    """Pairwise cross-class leakage, maximized over bands and battery.

    ``leakage[j][l]`` is the largest |<psi_{m k_j}|O|psi_{n k_l}>| / ||O||_max
    over all bands m, n and battery members O; the diagonal (within-sector
    coherence, which is allowed) is not computed and stays NaN.
    """

    leakage: np.ndarray
    battery_labels: tuple[str, ...]

    def __post_init__(self):
        leakage = np.array(self.leakage, dtype=float)
        leakage.setflags(write=False)
        object.__setattr__(self, "leakage", leakage)

    @property
    def max_offdiagonal(self) -> float:
        off = self.leakage[~np.isnan(self.leakage)]
        return float(np.max(off)) if off.size else 0.0


def matrix_element(
    operator: HermitianOperator, bra: BlochState, ket: BlochState
) -> OverlapRecord:
    """<bra| O |ket> in the plane-wave basis."""
    if len(bra.coeffs) != operator.dim or len(ket.coeffs) != operator.dim:
        raise ValueError("state and operator dimensions disagree")
    value = complex(bra.coeffs.conj() @ operator.matrix @ ket.coeffs)
    return OverlapRecord(
        bra_band=bra.band,
        bra_sector=bra.sector,
        bra_wavevector=bra.wavevector,
        ket_band=ket.band,
        ket_sector=ket.sector,
        ket_wavevector=ket.wavevector,
        observable=operator.label,
        value=value,
    )


def fringe_scan(
    operator: HermitianOperator,
    a: BlochState,
    b: BlochState,
    n_phases: int = 64,
) -> FringeScan:
    """Sweep the relative phase of |a> + e^{i lambda} |b> and average O.

    The unnormalized cross term is 2 |<a|O|b>| cos(lambda + Arg<a|O|b>), so a
    vanishing cross element makes the scan flat.  Raises ValueError when a
    grid point makes the superposition collapse (anti-parallel states).
    """
    if n_phases < 8:
        raise ValueError("need at least 8 phase points")
    phases = 2.0 * np.pi * np.arange(n_phases) / n_phases
    averages = np.empty(n_phases)
    o = operator.matrix
    for i, lam in enumerate(phases):
        combined = a.coeffs + np.exp(1j * lam) * b.coeffs
        norm_sq = float(np.real(combined.conj() @ combined))
        if norm_sq < DEGENERATE_NORM_ATOL:
            raise ValueError(
                f"degenerate superposition at lambda={lam:.6f}: states anti-parallel"
            )
        averages[i] = float(np.real(combined.conj() @ o @ combined)) / norm_sq
    return FringeScan(phases=phases, averages=averages, observable=operator.label)


def mixture_diagnostic(
    a: BlochState, b: BlochState, battery: list[HermitianOperator]
) -> MixtureDiagnostic:
    """Compare |a>+|b> (equal weights) against the 50/50 classical mixture.

    Requires orthogonal unit-norm inputs so the mixture weights are exactly
    one half and the superposition normalizes to <Phi|Phi> = 2.
    """
    overlap = abs(complex(a.coeffs.conj() @ b.coeffs))
    if overlap > ORTHOGONALITY_ATOL:
        raise ValueError(f"states are not orthogonal: |<a|b>| = {overlap:.3e}")
    combined = a.coeffs + b.coeffs
    norm_sq = float(np.real(combined.conj() @ combined))
    rho_sup = np.outer(combined, combined.conj()) / norm_sq
    rho_mix = 0.5 * (
        np.outer(a.coeffs, a.coeffs.conj()) + np.outer(b.coeffs, b.coeffs.conj())
    )
    delta = rho_sup - rho_mix
    per_obs = []
    for op in battery:
        value = abs(complex(np.trace(delta @ op.matrix))) / op.norm_max
        per_obs.append((op.label, float(value)))
    best = max((v for _, v in per_obs), default=0.0)
    return MixtureDiagnostic(
        rho_superposition=rho_sup,
        rho_mixture=rho_mix,
        distinguishability=best,
        per_observable=tuple(per_obs),
    )


def sector_decomposition_report(
    states: list[BlochState], battery: list[HermitianOperator]
) -> SectorDecompositionReport:
    """Maximal normalized cross-class matrix element for every class pair.

    Pairs are visited in lexicographic order and mirrored, so repeat runs
    produce identical reports.
    """
    sectors = sorted({s.sector for s in states})
    n = len(sectors)
    leakage = np.full((n, n), np.nan)
    by_sector = {l: [s for s in states if s.sector == l] for l in sectors}
    for j in sectors:
        bras = np.column_stack([s.coeffs for s in by_sector[j]])
        for l in sectors:
            if l <= j:
                continue
            kets = np.column_stack([s.coeffs for s in by_sector[l]])
            worst = 0.0
            for op in battery:
                elements = np.abs(bras.conj().T @ op.matrix @ kets) / op.norm_max
                worst = max(worst, float(np.max(elements)))
            leakage[j, l] = worst
            leakage[l, j] = worst
    return SectorDecompositionReport(
        leakage=leakage, battery_labels=tuple(op.label for op in battery)
    )


def wannier_mixture_residual(
    wannier: np.ndarray, band_states: list[BlochState], operator: HermitianOperator
) -> float:
    """|<w|O|w> - mean_l <psi_l|O|psi_l>| for one band's Wannier state.

    The Wannier state is an equal-weight phase combination of the band's
    Bloch states, so for cell-periodic O its expectation must equal the
    uniform classical average over the band.
    """
    w_avg = float(np.real(wannier.conj() @ operator.matrix @ wannier))
    band_avg = float(
        np.mean(
            [np.real(s.coeffs.conj() @ operator.matrix @ s.coeffs) for s in band_states]
        )
    )
    return abs(w_avg - band_avg)
