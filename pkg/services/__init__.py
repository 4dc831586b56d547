"""FreeLab Service - Main service class"""
import logging
from typing import List, Optional, Sequence, Tuple

from services.circle_search import (
    Budget,
    Prefix,
    SearchCertificate,
    Target,
    certify_circle_lower_bound,
    heuristic_circle_system,
    HeuristicResult,
)
from services.errors import FreeLabError, MetricError
from services.experiments import (
    ExperimentResult,
    cor33_experiment,
    lemma41_experiment,
    prop34_experiment,
    thm32_experiment,
)
from services.extensional import (
    CircleUnionEnumeration,
    ExtensionalReport,
    apply_function,
    enumerate_circle_union,
    verify_extensional_suite,
)
from services.measures import LipschitzFunction, Measure
from services.projections import (
    BasisConstant,
    ConditionalityWitness,
    UnconditionalResult,
    basis_constant,
    find_divergent_chains,
    lemma41_witness,
    projections_from_system,
    unconditional_constant,
)
from services.retractions import (
    Chain,
    RetractionSystem,
    SystemReport,
    chain_to,
    lip_constants,
    validate_system,
)
from services.spaces import (
    MetricReport,
    PointedMetricSpace,
    build_circle,
    build_circle_union,
    build_grid_net,
    validate_metric,
)
from services.transport import DualSolution, kr_norm, kr_norm_dual
from utils.constants import FREELAB_BUDGET_NODES, FREELAB_BUDGET_SECS, FREELAB_THREADS

logger = logging.getLogger(__name__)


class FreeLabService:
    """Main service that coordinates spaces, norms, systems, bases and searches"""

    def __init__(self, threads: int = FREELAB_THREADS, seed: int = 0):
        self.threads = max(1, threads)
        self.seed = seed

    def build_space(self, kind: str, n: Optional[int] = None, k: Optional[int] = None,
                    m: Optional[int] = None, dim: int = 2) -> PointedMetricSpace:
        """Construct one of the named spaces"""
        if kind == "circle":
            return build_circle(_required(n, "n"))
        if kind == "union":
            return build_circle_union(_required(k, "k"))
        if kind == "grid":
            return build_grid_net(_required(m, "m"), dim)
        raise MetricError(f"unknown space kind {kind!r}")

    def validate_space(self, labels: Sequence[str], dist, base: int = 0, exact: bool = True) -> MetricReport:
        return validate_metric(labels, dist, base, exact)

    def norm(self, measure: Measure, canonical: bool = True) -> Tuple[object, DualSolution]:
        """Primal transport value with the dual witness"""
        primal = kr_norm(measure)
        dual = kr_norm_dual(measure, canonical=canonical)
        if measure.space.exact and primal != dual.value:
            # both sides are exact; a gap means a solver bug, not a tolerance issue
            raise FreeLabError(f"duality gap: primal {primal} != dual {dual.value}")
        return primal, dual

    def validate_system(self, system: RetractionSystem) -> SystemReport:
        return validate_system(system)

    def lip_constants(self, system: RetractionSystem) -> List[object]:
        return lip_constants(system)

    def chain(self, system: RetractionSystem, x: int) -> Chain:
        return chain_to(system, x)

    def basis_constant(self, system: RetractionSystem) -> BasisConstant:
        return basis_constant(projections_from_system(system), self.threads)

    def unconditional_constant(self, system: RetractionSystem, exhaustive: bool = True,
                               samples: int = 100, seed: Optional[int] = None) -> UnconditionalResult:
        family = projections_from_system(system)
        if exhaustive:
            return unconditional_constant(family, "exhaustive", threads=self.threads)
        return unconditional_constant(
            family, "sampled", samples=samples, seed=self.seed if seed is None else seed, threads=self.threads
        )

    def conditionality_witness(self, system: RetractionSystem, beta,
                               alpha=None) -> Tuple[Chain, Chain, ConditionalityWitness]:
        """Witness for the deepest pair of nearby points with diverging chains"""
        pairs = find_divergent_chains(system, beta)
        if not pairs:
            raise FreeLabError(f"no pair within distance {beta} has chains diverging in two or more points")
        deepest = pairs[0]
        S, T = chain_to(system, deepest.x), chain_to(system, deepest.y)
        witness = lemma41_witness(system, S, T, beta, alpha=alpha, family=projections_from_system(system))
        return S, T, witness

    def search_circle(self, n: int, target: str = "auto", budget_nodes: int = FREELAB_BUDGET_NODES,
                      budget_secs: float = FREELAB_BUDGET_SECS,
                      resume: Optional[Sequence[Prefix]] = None) -> SearchCertificate:
        return certify_circle_lower_bound(
            n,
            Target.parse(target, n),
            Budget(nodes=budget_nodes, seconds=budget_secs),
            resume=resume,
            threads=self.threads,
        )

    def heuristic_circle(self, n: int, strategy: str) -> HeuristicResult:
        return heuristic_circle_system(n, strategy)

    def enumeration(self, k: int) -> CircleUnionEnumeration:
        return enumerate_circle_union(k)

    def verify_extensional(self, k: int, i_range: Optional[Tuple[int, int]] = None,
                           all_pairs: bool = False, samples: int = 20) -> ExtensionalReport:
        return verify_extensional_suite(
            enumerate_circle_union(k), i_range, all_pairs=all_pairs, samples=samples,
            seed=self.seed, threads=self.threads,
        )

    def apply_extension(self, enum: CircleUnionEnumeration, i: int, f: LipschitzFunction) -> LipschitzFunction:
        return apply_function(enum, i, f)

    def run_experiment(self, name: str, grid: Sequence[int] = (3, 4, 5, 6), n: int = 12, k: int = 2,
                       target: str = "auto", budget_nodes: int = FREELAB_BUDGET_NODES,
                       budget_secs: float = FREELAB_BUDGET_SECS) -> ExperimentResult:
        if name == "lemma41":
            return lemma41_experiment(grid, threads=self.threads)
        if name == "thm32":
            return thm32_experiment(
                n, Target.parse(target, n), Budget(nodes=budget_nodes, seconds=budget_secs), threads=self.threads
            )
        if name == "cor33":
            return cor33_experiment(k, seed=self.seed)
        if name == "prop34":
            return prop34_experiment(k, seed=self.seed, threads=self.threads)
        raise FreeLabError(f"unknown experiment {name!r}")


def _required(value, name: str):
    if value is None:
        raise MetricError(f"--{name} is required for this space")
    return value
