"""Free-space norm queries"""
from report_models import NormRequest, NormResponse
from services.errors import FreeLabError
from utils.rationals import format_value
from utils.serialization import load_space, parse_measure


def register_norm_handlers(cli, service):
    """Register the `norm` command"""

    @cli.on_command("norm", NormRequest, NormResponse)
    def handle_norm(req: NormRequest) -> NormResponse:
        """Primal transport value, dual value and the 1-Lipschitz witness"""
        try:
            space = load_space(req.space)
            measure = parse_measure(space, req.measure)
            primal, dual = service.norm(measure, canonical=req.canonical)
            witness = dual.witness
            return NormResponse(
                primal=format_value(primal),
                dual=format_value(dual.value),
                witness={space.label(x): format_value(v) for x, v in enumerate(witness.values)},
                witness_lip=format_value(witness.lipschitz_constant()),
            )
        except FreeLabError as e:
            return NormResponse(error=str(e))
