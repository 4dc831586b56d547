"""Basis constant, unconditional constant and conditionality witness"""
from report_models import (
    BasisConstantResponse,
    SystemRequest,
    UnconditionalRequest,
    UnconditionalResponse,
    WitnessRequest,
    WitnessResponse,
)
from services.errors import FreeLabError
from services.projections import projections_from_system, signed_sum_norm
from utils.rationals import format_value, parse_scalar
from utils.serialization import load_space, load_system


def register_basis_handlers(cli, service):
    """Register `basis` commands"""

    @cli.on_command("basis const", SystemRequest, BasisConstantResponse)
    def handle_basis_const(req: SystemRequest) -> BasisConstantResponse:
        try:
            space = load_space(req.space)
            result = service.basis_constant(load_system(space, req.system))
            return BasisConstantResponse(
                value=format_value(result.value), per_n=[format_value(v) for v in result.per_n]
            )
        except FreeLabError as e:
            return BasisConstantResponse(error=str(e))

    @cli.on_command("basis uncond", UnconditionalRequest, UnconditionalResponse)
    def handle_basis_uncond(req: UnconditionalRequest) -> UnconditionalResponse:
        try:
            space = load_space(req.space)
            result = service.unconditional_constant(
                load_system(space, req.system), exhaustive=req.exhaustive, samples=req.samples
            )
            return UnconditionalResponse(
                value=format_value(result.value),
                eps=list(result.eps),
                mode=result.mode,
                patterns=result.patterns,
                seed=result.seed,
                lower_bound=result.lower_bound,
            )
        except FreeLabError as e:
            return UnconditionalResponse(error=str(e))

    @cli.on_command("basis witness", WitnessRequest, WitnessResponse)
    def handle_basis_witness(req: WitnessRequest) -> WitnessResponse:
        """Conditionality witness for the deepest pair of nearby points"""
        try:
            space = load_space(req.space)
            system = load_system(space, req.system)
            beta = parse_scalar(req.beta, space.exact)
            alpha = None if req.alpha is None else parse_scalar(req.alpha, space.exact)
            S, T, witness = service.conditionality_witness(system, beta, alpha)
            norm = signed_sum_norm(projections_from_system(system), witness.eps, service.threads)
            return WitnessResponse(
                S=[space.label(p) for p in S.points],
                T=[space.label(p) for p in T.points],
                n=witness.n,
                t=witness.t,
                bound=format_value(witness.bound),
                certified=format_value(witness.certified),
                signed_sum_norm=format_value(norm),
                eps=list(witness.eps),
                f={space.label(x): format_value(v) for x, v in enumerate(witness.f.values) if v != 0},
            )
        except ValueError as e:
            return WitnessResponse(error=str(e))
