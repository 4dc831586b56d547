"""Canned experiment suites producing tabular results"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from services.circle_search import (
    STRATEGIES,
    Budget,
    Target,
    certify_circle_lower_bound,
    heuristic_circle_system,
    restrict_to_circle,
    theorem32_bound,
    union_heuristic_system,
)
from services.extensional import enumerate_circle_union, verify_extensional_suite
from services.projections import conditionality_growth
from services.retractions import random_system
from services.spaces import build_circle_union

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    experiment: str
    params: Dict[str, object]
    columns: List[str]
    rows: List[List[object]]
    passed: bool
    wall_time: float = 0.0
    details: Dict[str, object] = field(default_factory=dict)


def lemma41_experiment(ms: Sequence[int], threads: int = 1) -> ExperimentResult:
    """Conditionality witnesses on row-major grids; bounds must grow with m"""
    started = time.monotonic()
    growth = conditionality_growth(ms, threads=threads)
    rows = [[g.m, g.x, g.y, g.n, g.bound, g.certified, g.signed_sum_norm] for g in growth]
    norms = [g.signed_sum_norm for g in growth]
    increasing = all(a < b for a, b in zip(norms, norms[1:]))
    meets_bound = all(g.signed_sum_norm >= g.bound - 1e-9 for g in growth)
    return ExperimentResult(
        experiment="lemma41",
        params={"grid": list(ms)},
        columns=["m", "x", "y", "n", "bound", "certified", "signed_sum_norm"],
        rows=rows,
        passed=increasing and meets_bound,
        wall_time=time.monotonic() - started,
        details={"strictly_increasing": increasing},
    )


def thm32_experiment(
    n: int, target: Optional[Target] = None, budget: Optional[Budget] = None, threads: int = 1
) -> ExperimentResult:
    """Lower-bound certificate next to the heuristic upper bounds"""
    started = time.monotonic()
    target = target or Target.auto(n)
    bound = theorem32_bound(n)
    rows = []
    for strategy in STRATEGIES:
        result = heuristic_circle_system(n, strategy)
        rows.append([strategy, result.achieved, bound.value])
    certificate = certify_circle_lower_bound(n, target, budget, threads=threads)
    consistent = certificate.outcome != "certified" or all(
        target.reached_by(row[1]) for row in rows
    )
    return ExperimentResult(
        experiment="thm32",
        params={"n": n, "target": target.describe()},
        columns=["strategy", "achieved", "bound"],
        rows=rows,
        passed=consistent and certificate.outcome == "certified",
        wall_time=time.monotonic() - started,
        details={
            "outcome": certificate.outcome,
            "nodes_explored": certificate.nodes_explored,
            "hypothesis_met": bound.hypothesis_met,
        },
    )


def cor33_experiment(k_max: int, seed: int = 0, random_systems: int = 2) -> ExperimentResult:
    """Restriction dichotomy on the largest circle for heuristic and random systems"""
    started = time.monotonic()
    space = build_circle_union(k_max)
    systems = [(strategy, union_heuristic_system(k_max, strategy)) for strategy in STRATEGIES]
    rng = np.random.default_rng(seed)
    systems += [(f"random-{r}", random_system(space, rng)) for r in range(random_systems)]
    rows = []
    for name, system in systems:
        report = restrict_to_circle(system, k_max)
        escape = None
        if report.escape:
            j, x = report.escape
            escape = f"phi_{j}({space.label(x)})"
        rows.append([name, report.escaped, escape, report.lip, report.bound, report.holds])
    return ExperimentResult(
        experiment="cor33",
        params={"k": k_max, "seed": seed},
        columns=["system", "escaped", "escape", "lip", "bound", "holds"],
        rows=rows,
        passed=all(row[-1] for row in rows),
        wall_time=time.monotonic() - started,
    )


def prop34_experiment(k_max: int, seed: int = 0, threads: int = 1) -> ExperimentResult:
    started = time.monotonic()
    enum = enumerate_circle_union(k_max)
    report = verify_extensional_suite(enum, seed=seed, threads=threads)
    rows = [[r.i, r.level, r.norm, r.rank, r.fixes_D, r.convex, r.commutes_next, r.ledger_match] for r in report.rows]
    return ExperimentResult(
        experiment="prop34",
        params={"k": k_max, "seed": seed},
        columns=["i", "level", "norm", "rank", "fixes_D", "convex", "commutes_next", "ledger_match"],
        rows=rows,
        passed=report.passed,
        wall_time=time.monotonic() - started,
        details={"pair_cases": report.pair_cases, "contraction_checks": report.contraction_checks},
    )
