from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.utils.helpers import structure_to_dict, render_structure, format_seconds

VALID = 'valid'
INVALID = 'invalid'
TIMEOUT = 'timeout'


@dataclass(frozen=True)
class VerifyOptions:
    """
    Knobs of one verification run, usually filled from the application config.

    Attributes:
        solver (str): SAT backend: 'internal', 'pycosat' or 'cmd:PATH'.
        timeout (float, optional): Seconds for the whole decision.
        max_bound (int, optional): Largest universe the schedule may try.
        base (int): Growth factor of the size schedule.
        prune (bool): Drop infeasible 1-types from the bound.
        economical (bool): Economical normal form (False: plain baseline).
        atom_limit (int): Largest atom count for explicit 1-type enumeration.
        term_limit (int): Largest witness closure tried before the type count.
        type_limit (int): Largest number of 1-types counted by SAT.
        seed (int): Seed of the internal solver.
        solver_options (dict): Further internal CDCL tuning.
        replay (bool): Execute the program from an Invalid witness.
        artifact_dir (str, optional): Where stage dumps go when a stage fails.
    """
    solver: str = 'internal'
    timeout: Optional[float] = None
    max_bound: Optional[int] = None
    base: int = 2
    prune: bool = True
    economical: bool = True
    atom_limit: int = 14
    term_limit: int = 32
    type_limit: int = 64
    seed: int = 0
    solver_options: Dict[str, float] = field(default_factory=dict)
    replay: bool = True
    artifact_dir: Optional[str] = None

    @classmethod
    def from_config(cls, config):
        """Builds options from an upper-case settings mapping (see `config.Config`)."""
        return cls(
            solver=config.get('SOLVER', 'internal'),
            timeout=config.get('SOLVER_TIMEOUT'),
            max_bound=config.get('MAX_BOUND'),
            base=config.get('DOUBLING_BASE', 2),
            prune=config.get('PRUNE_INFEASIBLE_TYPES', True),
            economical=config.get('ECONOMICAL_SSNF', True),
            atom_limit=config.get('TYPE_ATOM_LIMIT', 14),
            term_limit=config.get('WITNESS_TERM_LIMIT', 32),
            type_limit=config.get('TYPE_COUNT_LIMIT', 64),
            seed=config.get('SEED', 0),
            solver_options={
                key: config[name] for key, name in (
                    ('var_decay', 'VAR_DECAY'),
                    ('restart_first', 'RESTART_FIRST'),
                    ('restart_multiplier', 'RESTART_MULTIPLIER'),
                ) if config.get(name) is not None
            },
            artifact_dir=config.get('ARTIFACT_DIR'),
        )


@dataclass(frozen=True)
class VcBundle:
    """
    The formulas of one verification condition, from wp to the lowered FO² sentence.

    Attributes:
        wp (Formula): wp(P, post ∧ Inv).
        vc (Formula): (pre ∧ Inv) ∧ ¬wp, simplified.
        lowered (Formula): The VC as a plain FO² sentence (constants kept).
        lowering_map (LoweringMap): Inverse of the lowering, for decoding models.
    """
    wp: object
    vc: object
    lowered: object
    lowering_map: object


@dataclass
class Verdict:
    """
    Outcome of verifying one Hoare triple.

    Attributes:
        status (str): 'valid', 'invalid' or 'timeout'.
        program (str): Name of the verified program.
        counterexample (Structure): For 'invalid': an initial state satisfying
            pre ∧ Inv and falsifying wp(P, post ∧ Inv).
        final_states (tuple): For 'invalid' with replay: the final states the
            interpreter reached from the counterexample that break the postcondition.
        replayed (bool): True when the counterexample was confirmed by execution.
        stage (str): For 'timeout': 'solve' or 'bound'.
        last_size (int): For 'timeout': largest universe size decided.
        sizes_tried (list): Universe sizes whose CNF was solved.
        bound (BoundReport): The cardinality bound of the VC.
        timings (dict): Seconds per stage.
        schema (SchemaDecl): State schema, for rendering column names.
    """
    status: str
    program: str = ''
    counterexample: object = None
    final_states: Tuple[object, ...] = ()
    replayed: bool = False
    stage: Optional[str] = None
    last_size: Optional[int] = None
    sizes_tried: List[int] = field(default_factory=list)
    bound: object = None
    timings: Dict[str, float] = field(default_factory=dict)
    schema: object = field(default=None, repr=False, compare=False)

    @property
    def is_valid(self):
        return self.status == VALID

    @property
    def is_invalid(self):
        return self.status == INVALID

    def to_dict(self):
        data = {
            'status': self.status,
            'program': self.program,
            'sizes_tried': list(self.sizes_tried),
            'bound': self.bound.to_dict() if self.bound is not None else None,
            'timings': {name: round(seconds, 6) for name, seconds in self.timings.items()},
        }
        if self.counterexample is not None:
            data['counterexample'] = structure_to_dict(self.counterexample)
            data['replayed'] = self.replayed
            data['final_states'] = [structure_to_dict(s.structure, s.exited) for s in self.final_states]
        if self.status == TIMEOUT:
            data['stage'] = self.stage
            data['last_size'] = self.last_size
        return data

    def render(self):
        """Text report: verdict line, counterexample tables, timings."""
        lines = [f"{self.program}: {self.status.upper()}"]
        if self.status == TIMEOUT:
            lines.append(f"  stopped in stage '{self.stage}' after size {self.last_size}")
        if self.bound is not None:
            lines.append(f"  bound {self.bound.bnd} (m={self.bound.m}, constants={self.bound.num_constants}, "
                         f"feasible types={self.bound.feasible_nonconstant_types}), sizes {self.sizes_tried}")
        if self.counterexample is not None:
            lines.append("counterexample (initial state):")
            lines.append(render_structure(self.counterexample, self.schema))
            for index, final in enumerate(self.final_states, start=1):
                marker = " (exited)" if final.exited else ""
                lines.append(f"final state {index}{marker}:")
                lines.append(render_structure(final.structure, self.schema))
        if self.timings:
            lines.append("timings: " + ", ".join(f"{name} {format_seconds(seconds)}"
                                                 for name, seconds in self.timings.items()))
        return "\n".join(lines)
