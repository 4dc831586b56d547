"""Circle lower-bound search and heuristic systems"""
from report_models import (
    HeuristicRequest,
    HeuristicResponse,
    SearchCertificateResponse,
    SearchCircleRequest,
)
from services.circle_search import theorem32_bound
from services.errors import FreeLabError, SearchError
from utils.constants import FREELAB_BUDGET_NODES, FREELAB_BUDGET_SECS
from utils.rationals import format_value
from utils.serialization import load_frontier, system_to_dict, write_frontier


def register_search_handlers(cli, service):
    """Register `search` commands"""

    @cli.on_command("search circle", SearchCircleRequest, SearchCertificateResponse)
    def handle_search_circle(req: SearchCircleRequest) -> SearchCertificateResponse:
        """Exhaustive search; an exhausted budget leaves a resumable frontier"""
        try:
            resume = None
            if req.resume:
                n, resume = load_frontier(req.resume)
                if n != req.n:
                    raise SearchError(f"checkpoint is for n={n}, not n={req.n}")
            cert = service.search_circle(
                req.n,
                req.target,
                budget_nodes=req.budget_nodes or FREELAB_BUDGET_NODES,
                budget_secs=req.budget_secs or FREELAB_BUDGET_SECS,
                resume=resume,
            )
            checkpoint = None
            if cert.outcome == "indeterminate" and req.checkpoint:
                write_frontier(req.checkpoint, req.n, req.target, cert.nodes_explored, cert.frontier)
                checkpoint = req.checkpoint
            return SearchCertificateResponse(
                n=cert.n,
                target=cert.target.describe(),
                target_value=cert.target.value,
                outcome=cert.outcome,
                nodes_explored=cert.nodes_explored,
                wall_time=round(cert.wall_time, 3),
                system=system_to_dict(cert.system) if cert.system else None,
                achieved=format_value(cert.achieved) if cert.achieved is not None else None,
                heuristics={name: format_value(v) for name, v in cert.heuristics.items()},
                frontier_size=len(cert.frontier),
                checkpoint=checkpoint,
            )
        except FreeLabError as e:
            return SearchCertificateResponse(n=req.n, error=str(e))

    @cli.on_command("search heuristic", HeuristicRequest, HeuristicResponse)
    def handle_search_heuristic(req: HeuristicRequest) -> HeuristicResponse:
        try:
            result = service.heuristic_circle(req.n, req.strategy)
            return HeuristicResponse(
                n=req.n,
                strategy=result.strategy,
                achieved=format_value(result.achieved),
                bound=theorem32_bound(req.n).value,
                system=system_to_dict(result.system),
                lip=[format_value(v) for v in service.lip_constants(result.system)],
            )
        except FreeLabError as e:
            return HeuristicResponse(n=req.n, error=str(e))
