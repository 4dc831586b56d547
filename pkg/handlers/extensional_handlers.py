"""Extension operators on truncated circle unions"""
from report_models import (
    ExtensionalApplyRequest,
    ExtensionalResponse,
    ExtensionalRowModel,
    ExtensionalVerifyRequest,
    FunctionResponse,
)
from services.errors import BasisError, FreeLabError
from utils.rationals import format_value
from utils.serialization import load_function


def parse_range(text: str):
    """"a..b" -> (a, b)"""
    first, sep, last = text.partition("..")
    if not sep:
        raise BasisError(f"index range must look like a..b, got {text!r}")
    try:
        return int(first), int(last)
    except ValueError:
        raise BasisError(f"index range must look like a..b, got {text!r}") from None


def register_extensional_handlers(cli, service):
    """Register `extensional` commands"""

    @cli.on_command("extensional verify", ExtensionalVerifyRequest, ExtensionalResponse)
    def handle_extensional_verify(req: ExtensionalVerifyRequest) -> ExtensionalResponse:
        try:
            i_range = parse_range(req.i_range) if req.i_range else None
            report = service.verify_extensional(req.k, i_range, all_pairs=req.all_pairs, samples=req.samples)
            rows = [
                ExtensionalRowModel(
                    i=r.i,
                    level=r.level,
                    norm=format_value(r.norm),
                    rank=r.rank,
                    fixes_D=r.fixes_D,
                    convex=r.convex,
                    commutes_next=r.commutes_next,
                    ledger_match=r.ledger_match,
                )
                for r in report.rows
            ]
            return ExtensionalResponse(
                k=req.k,
                passed=report.passed,
                rows=rows,
                commutation_failures=[list(p) for p in report.commutation_failures],
                contraction_checks=report.contraction_checks,
                contraction_failures=report.contraction_failures,
                pair_cases=report.pair_cases,
            )
        except FreeLabError as e:
            return ExtensionalResponse(k=req.k, error=str(e))

    @cli.on_command("extensional apply", ExtensionalApplyRequest, FunctionResponse)
    def handle_extensional_apply(req: ExtensionalApplyRequest) -> FunctionResponse:
        """P_i f over the whole truncation"""
        try:
            enum = service.enumeration(req.k)
            f = load_function(enum.space, req.f)
            image = service.apply_extension(enum, req.i, f)
            return FunctionResponse(
                values={enum.space.label(x): format_value(v) for x, v in enumerate(image.values)},
                lip=format_value(image.lipschitz_constant()),
            )
        except FreeLabError as e:
            return FunctionResponse(error=str(e))
