"""Space construction and validation commands"""
from typing import Sequence

from report_models import (
    CircleSpaceRequest,
    GridSpaceRequest,
    SpaceResponse,
    SpaceValidateRequest,
    UnionSpaceRequest,
    ViolationModel,
)
from services.errors import FreeLabError
from services.spaces import PointedMetricSpace
from utils.serialization import read_space, space_to_dict


def violation_models(labels: Sequence[str], violations) -> list:
    return [
        ViolationModel(kind=v.kind, points=[labels[i] for i in v.indices], detail=v.detail)
        for v in violations
    ]


def space_response(space: PointedMetricSpace) -> SpaceResponse:
    data = space_to_dict(space)
    return SpaceResponse(
        points=data["points"],
        base=data["base"],
        dist=data["dist"],
        exact=data["exact"],
        kind=data.get("kind", space.kind),
        params=data.get("params", {}),
    )


def register_space_handlers(cli, service):
    """Register `space` commands"""

    @cli.on_command("space circle", CircleSpaceRequest, SpaceResponse)
    def handle_space_circle(req: CircleSpaceRequest) -> SpaceResponse:
        try:
            return space_response(service.build_space("circle", n=req.n))
        except FreeLabError as e:
            return SpaceResponse(valid=False, error=str(e))

    @cli.on_command("space union", UnionSpaceRequest, SpaceResponse)
    def handle_space_union(req: UnionSpaceRequest) -> SpaceResponse:
        try:
            return space_response(service.build_space("union", k=req.k))
        except FreeLabError as e:
            return SpaceResponse(valid=False, error=str(e))

    @cli.on_command("space grid", GridSpaceRequest, SpaceResponse)
    def handle_space_grid(req: GridSpaceRequest) -> SpaceResponse:
        try:
            return space_response(service.build_space("grid", m=req.m, dim=req.dim))
        except FreeLabError as e:
            return SpaceResponse(valid=False, error=str(e))

    @cli.on_command("space validate", SpaceValidateRequest, SpaceResponse)
    def handle_space_validate(req: SpaceValidateRequest) -> SpaceResponse:
        """Every violating pair or triple is listed, not just the first"""
        try:
            report = read_space(req.file)
            if report.valid:
                return space_response(report.space)
            return SpaceResponse(
                valid=False,
                violations=violation_models(report.labels, report.violations),
                error=report.describe(),
            )
        except FreeLabError as e:
            return SpaceResponse(valid=False, error=str(e))
