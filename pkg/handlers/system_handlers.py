"""Retraction system commands"""
import numpy as np

from handlers.space_handlers import violation_models
from report_models import (
    ChainResponse,
    LipResponse,
    SystemBuildRequest,
    SystemChainRequest,
    SystemRequest,
    SystemResponse,
    SystemValidationResponse,
)
from services.circle_search import STRATEGIES
from services.errors import FreeLabError, RetractionError
from services.retractions import random_system, row_major_grid_system
from utils.rationals import format_value
from utils.serialization import load_space, load_system, system_to_dict


def system_response(system, service) -> SystemResponse:
    data = system_to_dict(system)
    return SystemResponse(
        order=data["order"],
        parent=data["parent"],
        lip=[format_value(v) for v in service.lip_constants(system)],
    )


def register_system_handlers(cli, service):
    """Register `system` commands"""

    @cli.on_command("system build", SystemBuildRequest, SystemResponse)
    def handle_system_build(req: SystemBuildRequest) -> SystemResponse:
        try:
            space = load_space(req.space)
            if req.rule == "row-major":
                system = row_major_grid_system(space)
            elif req.rule == "random":
                seed = service.seed if req.seed is None else req.seed
                system = random_system(space, np.random.default_rng(seed))
            elif req.rule in STRATEGIES:
                if space.kind != "circle":
                    raise RetractionError(f"rule {req.rule!r} needs a circle space")
                system = service.heuristic_circle(space.params["n"], req.rule).system
            else:
                raise RetractionError(f"unknown rule {req.rule!r}")
            return system_response(system, service)
        except FreeLabError as e:
            return SystemResponse(error=str(e))

    @cli.on_command("system validate", SystemRequest, SystemValidationResponse)
    def handle_system_validate(req: SystemRequest) -> SystemValidationResponse:
        try:
            space = load_space(req.space)
            report = service.validate_system(load_system(space, req.system))
            return SystemValidationResponse(
                valid=report.valid,
                violations=violation_models(space.points, report.violations),
                checked_triples=report.checked_triples,
            )
        except FreeLabError as e:
            return SystemValidationResponse(error=str(e))

    @cli.on_command("system lip", SystemRequest, LipResponse)
    def handle_system_lip(req: SystemRequest) -> LipResponse:
        try:
            space = load_space(req.space)
            lips = service.lip_constants(load_system(space, req.system))
            best = max(range(len(lips)), key=lambda i: lips[i])
            return LipResponse(lip=[format_value(v) for v in lips], max=format_value(lips[best]), argmax=best)
        except FreeLabError as e:
            return LipResponse(error=str(e))

    @cli.on_command("system chain", SystemChainRequest, ChainResponse)
    def handle_system_chain(req: SystemChainRequest) -> ChainResponse:
        try:
            space = load_space(req.space)
            system = load_system(space, req.system)
            chain = service.chain(system, space.index(req.point))
            return ChainResponse(
                chain=[space.label(p) for p in chain.points],
                positions=[system.position[p] for p in chain.points],
            )
        except FreeLabError as e:
            return ChainResponse(error=str(e))
