"""
freelab - computations in finite Lipschitz-free spaces

Transport norms, retraction systems and their Schauder projections, the
circle lower-bound search and the extensional basis on circle unions, all
behind one subcommand-style command line. JSON reports go to stdout (and to
--out DIR with CSV companions), diagnostics to stderr.

Exit codes: 0 success, 1 validation failure or bad input, 2 search budget
exhausted before a verdict.
"""

import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from services import FreeLabService
from utils.cli import CommandRouter, UsageError
from utils.serialization import write_csv, write_report

load_dotenv()

from handlers.space_handlers import register_space_handlers
from handlers.norm_handlers import register_norm_handlers
from handlers.system_handlers import register_system_handlers
from handlers.basis_handlers import register_basis_handlers
from handlers.search_handlers import register_search_handlers
from handlers.extensional_handlers import register_extensional_handlers
from handlers.experiment_handlers import register_experiment_handlers


def create_cli(service: FreeLabService) -> CommandRouter:
    cli = CommandRouter("freelab")
    register_space_handlers(cli, service)
    register_norm_handlers(cli, service)
    register_system_handlers(cli, service)
    register_basis_handlers(cli, service)
    register_search_handlers(cli, service)
    register_extensional_handlers(cli, service)
    register_experiment_handlers(cli, service)
    return cli


def run_command(argv: List[str], service: Optional[FreeLabService] = None) -> int:
    service = service or FreeLabService()
    cli = create_cli(service)
    try:
        options, command, request = cli.parse(argv)
    except UsageError as e:
        print(f"freelab: {e}", file=sys.stderr)
        return 1

    logging.basicConfig(
        level=options.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    service.threads = max(1, options.threads)
    service.seed = options.seed

    response = cli.dispatch(command, request)
    print(response.model_dump_json(indent=2))
    if response.error:
        print(f"freelab: {response.error}", file=sys.stderr)

    if options.out:
        name = "_".join(command.path)
        path = write_report(response.model_dump(mode="json"), options.out, name)
        table = response.table()
        if table:
            write_csv(table[0], table[1], os.path.join(options.out, f"{name}.csv"))
        logging.getLogger("freelab").info("report written to %s", path)
    return response.exit_code()


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
