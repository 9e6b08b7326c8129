from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

SAT = 'sat'
UNSAT = 'unsat'
TIMEOUT = 'timeout'


@dataclass(frozen=True)
class SatResult:
    """
    Outcome of one propositional satisfiability check.

    Attributes:
        status (str): 'sat' or 'unsat'.
        assignment (dict): variable id -> bool for every variable, when satisfiable.
        stats (dict): Backend counters (conflicts, decisions, restarts, ...).
    """
    status: str
    assignment: Optional[Dict[int, bool]] = None
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def is_sat(self):
        return self.status == SAT


@dataclass(frozen=True)
class Schedule:
    """
    Universe sizes tried in order: 1, b, b², ... up to the bound.

    Attributes:
        sizes (tuple): Strictly increasing sizes.
        bound (int): The bound the schedule would reach without a cap.
        capped (bool): True when the last size is below `bound`.
    """
    sizes: Tuple[int, ...]
    bound: int
    capped: bool = False

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)


@dataclass
class FiniteSatResult:
    """
    Outcome of deciding finite satisfiability of an FO² sentence.

    Attributes:
        status (str): 'sat', 'unsat' or 'timeout'.
        structure (Structure): The decoded model when satisfiable, over the
            lowered (pre-normalization) vocabulary.
        size (int): Universe size of the CNF that was satisfiable.
        bound (BoundReport): The cardinality bound.
        sizes_tried (list): Universe sizes whose CNF was solved, in order.
        stage (str): Where a timeout happened ('solve' or 'bound').
        last_size (int): Largest size whose CNF was decided before a timeout.
        timings (dict): Seconds per stage.
    """
    status: str
    structure: object = None
    size: Optional[int] = None
    bound: object = None
    sizes_tried: list = field(default_factory=list)
    stage: Optional[str] = None
    last_size: Optional[int] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def is_sat(self):
        return self.status == SAT
