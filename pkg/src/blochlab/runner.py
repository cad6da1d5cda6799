"""Scenario execution: compute, check invariants, emit reports.

Every run produces a RunReport that is self-contained (full config echo plus
its hash, the tolerances actually used, per-invariant pass flags) and
deterministic except for the trailing ``timing`` block.  Output files are
written atomically next to the report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bloch import solve_bands, wannier_state
from .config import ScenarioConfig
from .errors import ConfigError, NumericalFailure
from .floquet import (
    PeriodicObservableSpec,
    mode_trajectory,
    propagate_period,
    sambe_quasienergies,
    solve_floquet,
    temporal_overlap_probe,
)
from .lattice import HermitianOperator, build_basis, build_hamiltonian, build_translation
from .observables import (
    breaking_observable,
    build_observable,
    check_cell_periodicity,
    named_observables,
    random_cell_periodic,
)
from .reports import (
    atomic_write_text,
    bands_csv,
    canonical_hash,
    emit_fringe_series,
    jsonable,
    render_json,
)
from .superselection import (
    fringe_scan,
    matrix_element,
    sector_decomposition_report,
    wannier_mixture_residual,
)

TOOL_NAME = "blochlab"


@dataclass
class RunReport:
    kind: str
    config: dict
    config_sha256: str
    tolerances: dict
    results: dict
    checks: dict
    timing: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "tool": {"name": TOOL_NAME, "version": __version__},
            "kind": self.kind,
            "config_sha256": self.config_sha256,
            "config": self.config,
            "tolerances": self.tolerances,
            "results": self.results,
            "checks": self.checks,
            "passed": self.passed,
            "timing": self.timing,
        }


def render_report(report: RunReport) -> str:
    return render_json(jsonable(report.as_dict())) + "\n"


def stable_report_bytes(report: RunReport) -> bytes:
    """Rendering with the timing block dropped; the determinism contract."""
    payload = report.as_dict()
    payload.pop("timing")
    return (render_json(jsonable(payload)) + "\n").encode()


def _battery(cfg: ScenarioConfig, basis) -> list[HermitianOperator]:
    named = named_observables(basis)
    ops = [named[name] for name in cfg.battery.named]
    ops.extend(
        random_cell_periodic(
            seed, basis, max_harmonic=cfg.battery.max_harmonic, degree=cfg.battery.degree
        )
        for seed in range(1, cfg.battery.seeds + 1)
    )
    ops.extend(
        build_observable(spec, basis, label=f"custom:{i}")
        for i, spec in enumerate(cfg.battery.custom)
    )
    return ops


def _solve_lattice(cfg: ScenarioConfig):
    spec = cfg.lattice
    basis = build_basis(spec)
    h = build_hamiltonian(spec, cfg.potential)
    t = build_translation(spec)
    structure, states = solve_bands(h, spec)
    return spec, basis, h, t, structure, states


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    started = time.perf_counter()
    runner = {
        "bands": _run_bands,
        "superselect": _run_superselect,
        "wannier": _run_wannier,
        "floquet": _run_floquet,
    }[cfg.kind]
    results, checks = runner(cfg)
    timing = {
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": time.perf_counter() - started,
    }
    return RunReport(
        kind=cfg.kind,
        config=cfg.echo,
        config_sha256=canonical_hash(cfg.echo),
        tolerances=cfg.resolved_tolerances(),
        results=results,
        checks=checks,
        timing=timing,
    )


# ---------------------------------------------------------------------------
# bands


def _run_bands(cfg: ScenarioConfig):
    spec, basis, h, t, structure, states = _solve_lattice(cfg)
    quality = _solver_quality_checks(cfg, h, t, states)

    results = {
        "dimension": basis.dim,
        "bands_per_class": basis.dim // spec.cells,
        "k_values": list(structure.k_values),
        "energies": [list(row) for row in structure.energies],
        "deviations": quality["deviations"],
    }
    checks = dict(quality["checks"])

    if cfg.potential.is_free:
        worst = 0.0
        for sector in range(spec.cells):
            rows = basis.class_rows(sector)
            kinetic = np.sort((spec.hbar * basis.momenta[rows]) ** 2 / (2.0 * spec.mass))
            worst = max(worst, float(np.max(np.abs(structure.energies[sector] - kinetic))))
        results["deviations"]["free_particle"] = worst
        checks["free_particle_exact"] = worst < 1e-12 * max(1.0, h.norm_max)

    if "csv" in cfg.output:
        atomic_write_text(cfg.output["csv"], bands_csv(structure))
    return results, checks


def _solver_quality_checks(cfg: ScenarioConfig, h, t, states):
    psi = np.column_stack([s.coeffs for s in states])
    gram = psi.conj().T @ psi
    ortho = float(np.max(np.abs(gram - np.eye(len(states)))))
    eig_resid = max(
        float(np.linalg.norm(h.matrix @ s.coeffs - s.energy * s.coeffs)) for s in states
    ) / max(h.norm_max, 1e-300)
    spec = cfg.lattice
    trans_resid = max(
        float(
            np.linalg.norm(
                t @ s.coeffs - np.exp(1j * s.wavevector * spec.a) * s.coeffs
            )
        )
        for s in states
    )
    deviations = {
        "orthonormality": ortho,
        "eigen_residual": eig_resid,
        "translation_eigen": trans_resid,
    }
    checks = {
        "orthonormal": ortho < cfg.tolerance("solver_zero"),
        "eigen_residual": eig_resid < cfg.tolerance("eigen_residual"),
        "translation_eigen": trans_resid < cfg.tolerance("solver_zero"),
    }
    return {"deviations": deviations, "checks": checks}


# ---------------------------------------------------------------------------
# superselect


def _run_superselect(cfg: ScenarioConfig):
    spec, basis, h, t, structure, states = _solve_lattice(cfg)
    battery = _battery(cfg, basis)
    bands_per_class = basis.dim // spec.cells

    sector_report = sector_decomposition_report(states, battery)
    max_leak = sector_report.max_offdiagonal

    by_sector = {l: sorted((s for s in states if s.sector == l), key=lambda s: s.band)
                 for l in range(spec.cells)}

    results: dict = {
        "dimension": basis.dim,
        "battery": list(sector_report.battery_labels),
        "leakage": [list(row) for row in sector_report.leakage],
        "max_cross_leakage": max_leak,
    }
    checks = {"cross_sector_leakage": max_leak < cfg.tolerance("structural_zero")}

    scan_observable = battery[0]
    for op in battery:
        if op.label == "cos_a":
            scan_observable = op
            break

    cross_scan = fringe_scan(
        scan_observable, by_sector[0][0], by_sector[1][0], cfg.fringe_points
    )
    results["fringe_cross"] = {
        "observable": cross_scan.observable,
        "phases": list(cross_scan.phases),
        "averages": list(cross_scan.averages),
        "amplitude": cross_scan.amplitude,
    }
    checks["fringe_flat"] = cross_scan.amplitude < cfg.tolerance("solver_zero")

    if bands_per_class >= 2:
        worst_sector = None
        for sector in range(spec.cells):
            a, b = by_sector[sector][0], by_sector[sector][1]
            best = max(matrix_element(op, a, b).magnitude for op in battery)
            if worst_sector is None or best < worst_sector:
                worst_sector = best
        results["positive_control_min"] = worst_sector
        checks["positive_control"] = worst_sector > cfg.tolerance("positive_control")

        # scan the battery member with the strongest within-sector element, so
        # the fringe-vs-element comparison runs away from parity-forced zeros
        a, b = by_sector[0][0], by_sector[0][1]
        within_observable = max(
            battery, key=lambda op: matrix_element(op, a, b).magnitude
        )
        within_scan = fringe_scan(within_observable, a, b, cfg.fringe_points)
        element = matrix_element(within_observable, a, b).magnitude
        results["fringe_within"] = {
            "observable": within_scan.observable,
            "phases": list(within_scan.phases),
            "averages": list(within_scan.averages),
            "amplitude": within_scan.amplitude,
            "cross_element": element,
        }
        if element > cfg.tolerance("positive_control"):
            ratio_error = abs(within_scan.amplitude - 2.0 * element) / (2.0 * element)
            results["fringe_within"]["relative_mismatch"] = ratio_error
            checks["fringe_matches_element"] = ratio_error < 0.01
        if "fringe_prefix" in cfg.output:
            emit_fringe_series(cross_scan, cfg.output["fringe_prefix"] + "_cross.csv")
            emit_fringe_series(within_scan, cfg.output["fringe_prefix"] + "_within.csv")

    if cfg.negative_control_shift is not None:
        shift = cfg.negative_control_shift
        breaker = breaking_observable(shift, basis)
        periodicity = check_cell_periodicity(breaker, t)
        a = by_sector[0][0]
        b = by_sector[shift % spec.cells][0]
        breaking_scan = fringe_scan(breaker, a, b, cfg.fringe_points)
        results["negative_control"] = {
            "shift": shift,
            "periodicity_violation": periodicity.max_violation,
            "fringe_amplitude": breaking_scan.amplitude,
        }
        checks["negative_control"] = (
            not periodicity.is_cell_periodic
            and breaking_scan.amplitude > cfg.tolerance("negative_control")
        )

    return results, checks


# ---------------------------------------------------------------------------
# wannier


def _run_wannier(cfg: ScenarioConfig):
    spec, basis, h, t, structure, states = _solve_lattice(cfg)
    battery = _battery(cfg, basis)
    bands_per_class = basis.dim // spec.cells
    for band in cfg.wannier.bands:
        if band >= bands_per_class:
            raise ConfigError(
                f"band {band} out of range (this lattice has {bands_per_class} bands)",
                "/wannier/bands",
            )
    for cell in cfg.wannier.home_cells:
        if cell >= spec.cells:
            raise ConfigError(
                f"home cell {cell} out of range ({spec.cells} cells)", "/wannier/home_cells"
            )

    norm_dev = 0.0
    covariance = 0.0
    mixture = 0.0
    per_band = {}
    for band in cfg.wannier.bands:
        band_states = [s for s in states if s.band == band]
        w0 = wannier_state(band, 0, states, spec)
        w1 = wannier_state(band, 1, states, spec)
        covariance = max(covariance, float(np.linalg.norm(t.conj().T @ w0 - w1)))
        band_mixture = 0.0
        for cell in cfg.wannier.home_cells:
            w = wannier_state(band, cell, states, spec)
            norm_dev = max(norm_dev, abs(float(np.linalg.norm(w)) - 1.0))
            band_mixture = max(
                band_mixture,
                max(wannier_mixture_residual(w, band_states, op) for op in battery),
            )
        mixture = max(mixture, band_mixture)
        per_band[str(band)] = {"mixture_residual": band_mixture}

    results = {
        "bands": list(cfg.wannier.bands),
        "home_cells": list(cfg.wannier.home_cells),
        "per_band": per_band,
        "norm_deviation": norm_dev,
        "translation_covariance": covariance,
        "mixture_residual": mixture,
    }
    checks = {
        "unit_norm": norm_dev < cfg.tolerance("solver_zero"),
        "translation_covariance": covariance < cfg.tolerance("solver_zero"),
        "mixture_identity": mixture < cfg.tolerance("wannier_mixture"),
    }
    return results, checks


# ---------------------------------------------------------------------------
# floquet


def _default_probe_observable(dim: int) -> PeriodicObservableSpec:
    """Generic time-dependent Hermitian probe: fixed, documented choice."""
    from .floquet import DriveTerm

    static = np.zeros((dim, dim), dtype=complex)
    static[0, 1] = static[1, 0] = 1.0
    modulated = np.diag([1.0 if i % 2 == 0 else -1.0 for i in range(dim)]).astype(complex)
    return PeriodicObservableSpec(
        static=static, harmonics=(DriveTerm(harmonic=1, kind="cos", matrix=0.3 * modulated),)
    )


def _run_floquet(cfg: ScenarioConfig):
    fl = cfg.floquet
    drive = fl.drive
    solution = solve_floquet(drive, steps=fl.steps, method=fl.method)
    unitarity = solution.unitarity_defect

    other_method = "fourth-order" if fl.method == "midpoint-exponential" else "midpoint-exponential"
    other = propagate_period(drive, steps=fl.steps, method=other_method)
    cross = float(np.max(np.abs(solution.monodromy - other.monodromy)))

    sambe = sambe_quasienergies(drive, fl.sambe_hmax)
    sambe_diff = float(np.max(np.abs(np.sort(solution.quasienergies) - sambe)))

    solution = mode_trajectory(drive, solution, fl.trajectory_points)
    periodicity = float(np.max(solution.periodicity_residuals))

    results = {
        "dimension": drive.dim,
        "method": fl.method,
        "steps": fl.steps,
        "quasienergies": list(solution.quasienergies),
        "sambe_quasienergies": list(sambe),
        "unitarity_defect": unitarity,
        "cross_method_disagreement": cross,
        "sambe_disagreement": sambe_diff,
        "mode_periodicity_residual": periodicity,
    }
    checks = {
        "unitarity": unitarity < cfg.tolerance("unitarity"),
        "cross_method": cross < cfg.tolerance("cross_method"),
        "sambe_match": sambe_diff < cfg.tolerance("sambe_match"),
        "mode_periodicity": periodicity < cfg.tolerance("mode_periodicity"),
    }

    observable = fl.probe.observable or _default_probe_observable(drive.dim)
    try:
        probe = temporal_overlap_probe(
            drive,
            solution,
            observable,
            pair=fl.probe.pair,
            periods=fl.probe.periods,
            grid_points=fl.probe.grid,
        )
    except ValueError as exc:
        raise NumericalFailure(f"temporal probe rejected: {exc}") from exc

    slack = 1.0 + cfg.tolerance("average_slack")
    averages = dict(probe.period_averages)
    bounds = dict(probe.geometric_bounds)
    results["probe"] = {
        "pair": list(probe.pair),
        "splitting": probe.splitting,
        "grid_points": probe.grid_points,
        "phase_relation_residual": probe.phase_relation_residual,
        "period_averages": [[k, averages[k]] for k in sorted(averages)],
        "geometric_bounds": [[k, bounds[k]] for k in sorted(bounds)],
        "bound_coefficient": probe.bound_coefficient,
        "monodromy_commuting_element": probe.monodromy_commuting_element,
    }
    checks["phase_relation"] = probe.phase_relation_residual < cfg.tolerance("phase_relation")
    checks["average_bound"] = all(averages[k] <= slack * bounds[k] for k in averages)
    checks["monodromy_commuting"] = (
        probe.monodromy_commuting_element < cfg.tolerance("monodromy_commuting")
    )
    return results, checks
