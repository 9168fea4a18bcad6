"""
Subcommand package, one module per group of subcommands.
"""
from .analysis import cmd_absorb, cmd_classify, cmd_stationary
from .bench import cmd_bench
from .common import RunConfig
from .config_command import cmd_config
from .oracle_commands import cmd_simulate, cmd_verify
from .roulette import cmd_roulette

__all__ = [
    "RunConfig",
    "cmd_absorb",
    "cmd_stationary",
    "cmd_classify",
    "cmd_simulate",
    "cmd_verify",
    "cmd_bench",
    "cmd_roulette",
    "cmd_config",
]
