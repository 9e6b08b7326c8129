"""
A conflict-driven clause-learning SAT procedure.

Propagation watches two literals per clause. Conflicts are analysed to the
first unique implication point; the learnt clause is added and the search
jumps back to its second-highest level. Branching follows variable activity
(bumped for every variable seen during analysis, with geometric decay) and
the last phase a variable had. Restarts happen after a geometrically
growing number of conflicts.
"""

import logging
import time

import numpy as np
from sortedcontainers import SortedSet

from app.errors import SolverTimeout

logger = logging.getLogger(__name__)

UNASSIGNED = 0
TRUE = 1
FALSE = -1

_RESCALE_LIMIT = 1e100
_DEADLINE_CHECK_EVERY = 256


class CdclSolver:
    """
    One CNF instance and its search state.

    Args:
        num_vars (int): Variables are 1..num_vars.
        clauses (list): Lists of non-zero integer literals.
        seed (int): Seeds the initial phases.
        var_decay (float): Activity decay factor in (0, 1].
        restart_first (int): Conflicts before the first restart.
        restart_multiplier (float): Growth of the restart interval.
        deadline (float, optional): `time.monotonic()` value after which
            `solve` raises SolverTimeout.
    """

    def __init__(self, num_vars, clauses, seed=0, var_decay=0.95, restart_first=100, restart_multiplier=1.5,
                 deadline=None):
        self.num_vars = num_vars
        self.var_decay = var_decay
        self.restart_first = restart_first
        self.restart_multiplier = restart_multiplier
        self.deadline = deadline

        self.assigns = [UNASSIGNED] * (num_vars + 1)
        self.level = [0] * (num_vars + 1)
        self.reason = [None] * (num_vars + 1)
        rng = np.random.default_rng(seed)
        self.phase = [bool(p) for p in rng.integers(0, 2, size=num_vars + 1)]
        self.activity = np.zeros(num_vars + 1)
        self.var_inc = 1.0
        self.order = SortedSet((0.0, v) for v in range(1, num_vars + 1))

        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.clauses = []
        self.watches = {lit: [] for v in range(1, num_vars + 1) for lit in (v, -v)}
        self.stats = {'conflicts': 0, 'decisions': 0, 'propagations': 0, 'restarts': 0, 'learnt': 0}
        self.ok = True

        for clause in clauses:
            if not self.add_clause(clause):
                self.ok = False
                break

    # Assignment

    def value(self, lit):
        a = self.assigns[abs(lit)]
        return a if lit > 0 else -a

    def decision_level(self):
        return len(self.trail_lim)

    def enqueue(self, lit, reason):
        v = abs(lit)
        self.assigns[v] = TRUE if lit > 0 else FALSE
        self.level[v] = self.decision_level()
        self.reason[v] = reason
        self.trail.append(lit)

    def backtrack(self, level):
        if self.decision_level() <= level:
            return
        start = self.trail_lim[level]
        for lit in self.trail[start:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.assigns[v] = UNASSIGNED
            self.reason[v] = None
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = len(self.trail)

    # Clauses

    def add_clause(self, literals):
        """Adds an input clause at level 0; returns False when it makes the instance unsatisfiable."""
        clause = []
        for lit in literals:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
            if -lit in clause:
                return True
            if lit not in clause:
                clause.append(lit)
        clause = [lit for lit in clause if self.value(lit) != FALSE]
        if any(self.value(lit) == TRUE for lit in clause):
            return True
        if not clause:
            return False
        if len(clause) == 1:
            self.enqueue(clause[0], None)
            return True
        self._attach(clause)
        return True

    def _attach(self, clause):
        index = len(self.clauses)
        self.clauses.append(clause)
        self.watches[clause[0]].append(index)
        self.watches[clause[1]].append(index)
        return index

    def propagate(self):
        """Unit propagation; returns the index of a conflicting clause or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.stats['propagations'] += 1
            false_lit = -lit
            watchers = self.watches[false_lit]
            kept = []
            i = 0
            while i < len(watchers):
                index = watchers[i]
                i += 1
                clause = self.clauses[index]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                if self.value(clause[0]) == TRUE:
                    kept.append(index)
                    continue
                for k in range(2, len(clause)):
                    if self.value(clause[k]) != FALSE:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1]].append(index)
                        break
                else:
                    kept.append(index)
                    if self.value(clause[0]) == FALSE:
                        kept.extend(watchers[i:])
                        self.watches[false_lit] = kept
                        return index
                    self.enqueue(clause[0], index)
            self.watches[false_lit] = kept
        return None

    # Conflict analysis

    def _bump(self, v):
        self.order.discard((-self.activity[v], v))
        self.activity[v] += self.var_inc
        if self.activity[v] > _RESCALE_LIMIT:
            self.activity *= 1e-100
            self.var_inc *= 1e-100
            self.order = SortedSet((-self.activity[u], u) for u in range(1, self.num_vars + 1))
        else:
            self.order.add((-self.activity[v], v))

    def analyze(self, conflict):
        """
        Learns a clause from a conflict.

        Returns:
            tuple: (learnt clause with the asserting literal first and a
            literal of the backjump level second, backjump level).
        """
        seen = set()
        learnt = [0]
        pending = 0
        index = len(self.trail) - 1
        clause = self.clauses[conflict]
        implied = None
        current = self.decision_level()
        while True:
            for q in (clause if implied is None else clause[1:]):
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= current:
                        pending += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[index]) not in seen:
                index -= 1
            implied = self.trail[index]
            index -= 1
            seen.discard(abs(implied))
            pending -= 1
            if pending == 0:
                break
            clause = self.clauses[self.reason[abs(implied)]]
        learnt[0] = -implied
        if len(learnt) == 1:
            return learnt, 0
        deepest = max(range(1, len(learnt)), key=lambda j: self.level[abs(learnt[j])])
        learnt[1], learnt[deepest] = learnt[deepest], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    # Search

    def pick_branch(self):
        for _, v in self.order:
            if self.assigns[v] == UNASSIGNED:
                return v
        return None

    def solve(self):
        """
        Runs the search.

        Returns:
            dict or None: variable -> bool for every variable, or None when unsatisfiable.

        Raises:
            SolverTimeout: When the deadline passes.
        """
        if not self.ok or self.propagate() is not None:
            return None
        restart_limit = self.restart_first
        since_restart = 0
        steps = 0
        while True:
            steps += 1
            if self.deadline is not None and steps % _DEADLINE_CHECK_EVERY == 0 and time.monotonic() > self.deadline:
                raise SolverTimeout("SAT search exceeded its time budget", stage='solve')
            conflict = self.propagate()
            if conflict is not None:
                self.stats['conflicts'] += 1
                since_restart += 1
                if self.decision_level() == 0:
                    return None
                learnt, level = self.analyze(conflict)
                self.backtrack(level)
                if len(learnt) == 1:
                    self.enqueue(learnt[0], None)
                else:
                    self.enqueue(learnt[0], self._attach(learnt))
                    self.stats['learnt'] += 1
                self.var_inc /= self.var_decay
                if since_restart >= restart_limit:
                    self.stats['restarts'] += 1
                    since_restart = 0
                    restart_limit = int(restart_limit * self.restart_multiplier) + 1
                    self.backtrack(0)
                continue
            v = self.pick_branch()
            if v is None:
                return {u: self.assigns[u] == TRUE for u in range(1, self.num_vars + 1)}
            self.stats['decisions'] += 1
            self.trail_lim.append(len(self.trail))
            self.enqueue(v if self.phase[v] else -v, None)


def solve_cdcl(num_vars, clauses, **options):
    """Convenience wrapper: (assignment or None, stats)."""
    solver = CdclSolver(num_vars, clauses, **options)
    model = solver.solve()
    logger.debug(f"cdcl: {solver.stats}")
    return model, dict(solver.stats)
