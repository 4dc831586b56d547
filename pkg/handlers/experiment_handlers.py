"""Canned experiment suites"""
import networkx
import numpy
import ot
import pydantic
import scipy

from report_models import (
    ExperimentReport,
    Lemma41ExperimentRequest,
    Thm32ExperimentRequest,
    UnionExperimentRequest,
)
from services.errors import FreeLabError
from utils.constants import FREELAB_BUDGET_NODES, FREELAB_BUDGET_SECS, VERSION
from utils.rationals import format_value

VERSIONS = {
    "freelab": VERSION,
    "numpy": numpy.__version__,
    "scipy": scipy.__version__,
    "networkx": networkx.__version__,
    "pot": ot.__version__,
    "pydantic": pydantic.VERSION,
}


def _cell(value):
    if value is None or isinstance(value, (bool, str)):
        return value
    return format_value(value)


def experiment_report(result, service) -> ExperimentReport:
    inputs = dict(result.params)
    inputs.update({"seed": service.seed, "threads": service.threads})
    return ExperimentReport(
        experiment=result.experiment,
        inputs=inputs,
        columns=result.columns,
        rows=[[_cell(v) for v in row] for row in result.rows],
        passed=result.passed,
        details=result.details,
        versions=VERSIONS,
        wall_time=round(result.wall_time, 3),
    )


def register_experiment_handlers(cli, service):
    """Register `experiment` commands"""

    @cli.on_command("experiment lemma41", Lemma41ExperimentRequest, ExperimentReport)
    def handle_experiment_lemma41(req: Lemma41ExperimentRequest) -> ExperimentReport:
        try:
            grid = [int(m) for m in req.grid.split(",") if m.strip()]
            return experiment_report(service.run_experiment("lemma41", grid=grid), service)
        except ValueError as e:
            return ExperimentReport(experiment="lemma41", error=str(e))

    @cli.on_command("experiment thm32", Thm32ExperimentRequest, ExperimentReport)
    def handle_experiment_thm32(req: Thm32ExperimentRequest) -> ExperimentReport:
        try:
            result = service.run_experiment(
                "thm32",
                n=req.n,
                target=req.target,
                budget_nodes=req.budget_nodes or FREELAB_BUDGET_NODES,
                budget_secs=req.budget_secs or FREELAB_BUDGET_SECS,
            )
            return experiment_report(result, service)
        except FreeLabError as e:
            return ExperimentReport(experiment="thm32", error=str(e))

    @cli.on_command("experiment cor33", UnionExperimentRequest, ExperimentReport)
    def handle_experiment_cor33(req: UnionExperimentRequest) -> ExperimentReport:
        try:
            return experiment_report(service.run_experiment("cor33", k=req.k), service)
        except FreeLabError as e:
            return ExperimentReport(experiment="cor33", error=str(e))

    @cli.on_command("experiment prop34", UnionExperimentRequest, ExperimentReport)
    def handle_experiment_prop34(req: UnionExperimentRequest) -> ExperimentReport:
        try:
            return experiment_report(service.run_experiment("prop34", k=req.k), service)
        except FreeLabError as e:
            return ExperimentReport(experiment="prop34", error=str(e))
