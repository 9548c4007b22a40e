from .ast import *  # noqa: F401,F403
from .normal import (  # noqa: F401
    NOT_SNF,
    FragmentLabel,
    Namer,
    classify,
    desugar,
    free_vars,
    is_core,
    negate,
    prenex_parts,
    so_prefix,
    to_snf,
)
from .parser import parse, pretty  # noqa: F401
