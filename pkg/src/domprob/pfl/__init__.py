"""A small probabilistic PCF with interval reals."""

from .semantics import (
    Outcome,
    SweepReport,
    evaluate,
    int_quadrature,
    lcg_bits,
    precision_sweep,
    run,
    sample_interval,
    step,
)
from .syntax import PflSyntaxError, parse, parse_type, show, show_type
from .typecheck import typecheck

__all__ = [
    "parse",
    "parse_type",
    "show",
    "show_type",
    "typecheck",
    "step",
    "evaluate",
    "run",
    "Outcome",
    "int_quadrature",
    "precision_sweep",
    "SweepReport",
    "lcg_bits",
    "sample_interval",
    "PflSyntaxError",
    "corpus",
]


def corpus():
    """``{name: source}`` for the bundled example programs."""
    from importlib import resources

    out = {}
    for f in sorted(resources.files(__package__).joinpath("corpus").iterdir(), key=lambda p: p.name):
        if f.name.endswith(".pfl"):
            out[f.name[:-4]] = f.read_text()
    return out
