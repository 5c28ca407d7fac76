"""Cross-checks between independent numerical paths.

Each check returns a ``CheckResult`` with the largest observed error and the
tolerance it was held to. ``run_checks`` collects them into a ``VerifyReport``.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from scipy import linalg

from bellcav.config import (
    BellKind,
    LaguerreConfig,
    ModelParams,
    ScenarioConfig,
    TimeGrid,
)
from bellcav.metrics import concurrence, negativity
from bellcav.propagators import (
    evolve_closed,
    evolve_lindblad,
    exact_propagator,
    laguerre_apply,
)
from bellcav.runner import execute_scenario
from bellcav.schema import CheckResult, VerifyReport
from bellcav.states import bell_projector

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20100817
SHORT_GRID = TimeGrid(t_max=4.0, dt=0.032)


def _result(name: str, error: float, tolerance: float, detail: str) -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(error <= tolerance),
        max_error=float(error),
        tolerance=tolerance,
        detail=detail,
    )


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / (2 * np.sqrt(dim))


def random_density(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    """Random two-qubit state from a 4 x ``rank`` Ginibre matrix."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def werner_state(p: float) -> np.ndarray:
    return p * bell_projector(BellKind.PSI_MINUS) + (1 - p) * np.eye(4) / 4


def check_laguerre(rng: np.random.Generator, trials: int = 20) -> CheckResult:
    worst = 0.0
    cfg = LaguerreConfig()
    for _ in range(trials):
        dim = int(rng.integers(2, 65))
        t = float(rng.uniform(0.0, 40.0))
        h = random_hermitian(rng, dim)
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        error = laguerre_apply(h, t, v, cfg) - exact_propagator(h, t) @ v
        worst = max(worst, float(np.linalg.norm(error)))
    return _result(
        "laguerre_vs_exact", worst, 1e-8, f"{trials} random Hermitian matrices"
    )


def check_closed_factorization() -> CheckResult:
    worst = 0.0
    cases = [
        (BellKind.PHI_PLUS, ModelParams(n_max=4)),
        (BellKind.PSI_PLUS, ModelParams(n_max=5, temperature=0.2)),
    ]
    for kind, params in cases:
        product = evolve_closed(kind, params, SHORT_GRID, method="laguerre")
        full = evolve_closed(kind, params, SHORT_GRID, method="exact", factorized=False)
        worst = max(
            worst, float(np.max(np.abs(product.reduced_states - full.reduced_states)))
        )
    return _result(
        "closed_factorized_vs_full", worst, 1e-8, "vacuum and thermal, small n_max"
    )


def check_lindblad_factorization() -> CheckResult:
    params = ModelParams(n_max=4, gamma=0.2)
    worst = 0.0
    for kind in (BellKind.PHI_PLUS, BellKind.PSI_PLUS):
        joint = evolve_lindblad(kind, params, SHORT_GRID, stepper="rk4")
        channels = evolve_lindblad(kind, params, SHORT_GRID, stepper="reference")
        worst = max(
            worst,
            float(np.max(np.abs(joint.reduced_states - channels.reduced_states))),
        )
    return _result("lindblad_joint_vs_channels", worst, 1e-6, "n_max=4, gamma=0.2")


def check_conservation() -> CheckResult:
    params = ModelParams(n_max=6, gamma=0.8)
    trajectory = evolve_lindblad(
        BellKind.PHI_PLUS, params, TimeGrid(t_max=10.0), stepper="reference"
    )
    states = trajectory.reduced_states
    drift = np.max(np.abs(np.real(np.trace(states, axis1=1, axis2=2)) - 1.0))
    lowest = min(float(linalg.eigvalsh(rho)[0]) for rho in states)
    return _result(
        "trace_and_positivity",
        max(float(drift), -lowest),
        1e-6,
        f"trace drift {drift:.2e}, lowest eigenvalue {lowest:.2e}",
    )


def check_ppt(rng: np.random.Generator, samples: int = 200) -> CheckResult:
    mismatches = 0
    for index in range(samples):
        rho = random_density(rng, rank=1 + index % 4)
        entangled = concurrence(rho) > 1e-8
        negative = negativity(rho) > 0
        mismatches += int(entangled != negative)
    return _result(
        "concurrence_vs_ppt",
        float(mismatches),
        0.0,
        f"{mismatches} of {samples} random states disagree",
    )


def check_werner() -> CheckResult:
    worst = 0.0
    for p in np.linspace(0.0, 1.0, 21):
        expected = max(0.0, (3 * p - 1) / 2)
        worst = max(worst, abs(concurrence(werner_state(float(p))) - expected))
    return _result("werner_concurrence", worst, 1e-10, "(3p - 1) / 2")


def check_initial_values() -> CheckResult:
    worst = 0.0
    start = TimeGrid(t_max=0.0)
    for kind in (BellKind.PHI_PLUS, BellKind.PSI_PLUS):
        configs = [
            ScenarioConfig(initial_state=kind, grid=start, validate_cutoff=False),
            ScenarioConfig(
                initial_state=kind,
                grid=start,
                params=ModelParams(gamma=0.2),
                validate_cutoff=False,
            ),
            ScenarioConfig(
                initial_state=kind,
                grid=start,
                bath_mode="thermal",
                params=ModelParams(temperature=0.2),
                validate_cutoff=False,
            ),
        ]
        for cfg in configs:
            series = execute_scenario(cfg).series
            worst = max(
                worst,
                abs(series.concurrence[0] - 1.0),
                abs(series.fidelity[0] - 1.0),
                abs(series.entropy[0]),
            )
    return _result("initial_values", float(worst), 1e-9, "(C, F, En) = (1, 1, 0)")


def run_checks(seed: int = DEFAULT_SEED) -> VerifyReport:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_laguerre(rng),
        check_closed_factorization,
        check_lindblad_factorization,
        check_conservation,
        lambda: check_ppt(rng),
        check_werner,
        check_initial_values,
    ]
    results = []
    for check in checks:
        result = check()
        logger.info(
            "%s: %s (max error %.2e)",
            result.name,
            "ok" if result.passed else "FAILED",
            result.max_error,
        )
        results.append(result)
    return VerifyReport(checks=results)
