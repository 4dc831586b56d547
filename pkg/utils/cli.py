"""Command router: argparse subcommands generated from pydantic request models"""
import argparse
import sys
import typing
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Type

from pydantic import BaseModel, ValidationError

from utils.constants import FREELAB_LOG_LEVEL, FREELAB_OUT_DIR, FREELAB_THREADS, VERSION


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; freelab reserves 2 for indeterminate searches"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class Command:
    path: Tuple[str, ...]
    request: Type[BaseModel]
    response: Type[BaseModel]
    handler: Callable


@dataclass
class GlobalOptions:
    out: Optional[str]
    threads: int
    seed: int
    log_level: str


def _unwrap(annotation):
    """Optional[X] -> X"""
    if typing.get_origin(annotation) is typing.Union:
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


class CommandRouter:
    def __init__(self, prog: str = "freelab"):
        self.prog = prog
        self.commands: Dict[Tuple[str, ...], Command] = {}

    def on_command(self, path: str, request: Type[BaseModel], response: Type[BaseModel]):
        """Register a handler for `group sub` taking the request model"""

        def decorator(func):
            key = tuple(path.split())
            self.commands[key] = Command(key, request, response, func)
            return func

        return decorator

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _Parser(prog=self.prog, description="Lipschitz-free space computations")
        parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
        parser.add_argument("--out", default=FREELAB_OUT_DIR or None, help="directory for JSON/CSV reports")
        parser.add_argument("--threads", type=int, default=FREELAB_THREADS)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=FREELAB_LOG_LEVEL)
        groups = parser.add_subparsers(dest="group", metavar="command", parser_class=_Parser)
        group_parsers: Dict[str, argparse._SubParsersAction] = {}
        for key, command in self.commands.items():
            group = key[0]
            if len(key) == 1:
                sub = groups.add_parser(group)
            else:
                if group not in group_parsers:
                    group_parser = groups.add_parser(group)
                    group_parsers[group] = group_parser.add_subparsers(
                        dest="sub", metavar="subcommand", parser_class=_Parser
                    )
                sub = group_parsers[group].add_parser(key[1])
            sub.set_defaults(_command=key)
            self._add_fields(sub, command.request)
        return parser

    @staticmethod
    def _add_fields(parser: argparse.ArgumentParser, model: Type[BaseModel]):
        for name, info in model.model_fields.items():
            flag = "--" + name.replace("_", "-")
            kind = _unwrap(info.annotation)
            kwargs = {"dest": name, "help": info.description}
            if kind is bool:
                parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=info.default, **kwargs)
                continue
            if info.is_required():
                kwargs["required"] = True
            else:
                kwargs["default"] = info.default
            parser.add_argument(flag, type=kind if kind in (int, float) else str, **kwargs)

    def parse(self, argv: List[str]) -> Tuple[GlobalOptions, Command, BaseModel]:
        namespace = self.build_parser().parse_args(argv)
        key = getattr(namespace, "_command", None)
        if key is None:
            raise UsageError("a command is required")
        command = self.commands[key]
        values = {name: getattr(namespace, name) for name in command.request.model_fields}
        try:
            request = command.request(**values)
        except ValidationError as e:
            raise UsageError(str(e)) from None
        if namespace.log_level not in LOG_LEVELS:
            # the default comes from FREELAB_LOG_LEVEL and skips argparse choices
            raise UsageError(f"unknown log level {namespace.log_level!r}")
        options = GlobalOptions(
            out=namespace.out, threads=namespace.threads, seed=namespace.seed, log_level=namespace.log_level
        )
        return options, command, request

    def dispatch(self, command: Command, request: BaseModel) -> BaseModel:
        return command.handler(request)
