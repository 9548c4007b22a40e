"""Random-access alternating Turing machines."""
from .builder import Builder, parse_program
from .example5 import GrowthFit, brute_force_sat, encode_cnf, growth_instance, measure_growth, polylogcnfsat_machine
from .fileformat import dump_machine, parse_machine
from .machine import (
    ACCEPT,
    ANY,
    BLANK,
    ENDMARK,
    EXISTENTIAL,
    REJECT,
    UNIVERSAL,
    Configuration,
    MachineSpec,
    Measurement,
    Rule,
    RunBudget,
    accepting_run,
    accepts,
    address_length,
    initial,
    measure,
    read_input,
    step,
    tree_size,
)


def load_machine(text: str, name: str = "machine") -> MachineSpec:
    """Parse raw (``rule`` lines) or builder (``on``/``otherwise``/``guess`` lines) text."""
    words = {line.split()[0] for line in text.splitlines() if line.strip() and not line.strip().startswith("#")}
    if words & {"on", "otherwise", "guess", "choose", "alphabet"}:
        return parse_program(text, name)
    return parse_machine(text, name)
