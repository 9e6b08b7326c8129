"""
Skolemized Scott normal form for FO² sentences.

`to_ssnf` keeps a pair (φ, ψ): φ is what is left to normalize and ψ the
normal form built so far. Each step moves a piece of φ into ψ. Steps that
only rearrange φ are tried before the step that introduces an auxiliary
relation, so simple sentences normalize without new symbols:

1. φ = ∀x Qy ε (or ∀x ε) with ε quantifier-free goes straight into ψ.
2. The same shape as a conjunct of φ is peeled off.
3. An existential outside every quantifier is witnessed by a fresh constant.
4. ∀z1 ((Qz2 δ1) ∘ δ2) becomes ∀z1 Qz2 (δ1 ∘ δ2).
5. A quantifier-free φ joins the ∀∀ matrix.
6. An innermost Qz δ is replaced by a fresh E(z̄) defined by two axioms.

Free variables of φ only ever occur in atoms of auxiliary relations that
stand for closed subformulas; such relations hold everywhere or nowhere, so
the variables are read as universally closed.
"""

import logging

from app.errors import LoweringError, NormalizationError
from app.logic.models import (
    DOM, Const, TrueF, Atom, And, Or, Forall, Exists, TRUE, QUANTIFIERS, Structure,
    conj, disj, neg,
)
from app.logic.services import (
    nnf, simplify, substitute_terms, free_variables, is_quantifier_free, check_fo2, constants_of,
    evaluate, enumerate_structures, vocabulary_of, formula_size,
)
from app.logic.printer import to_text
from app.normalizer.models import SsnfSentence, X, Y

logger = logging.getLogger(__name__)


def _other(name):
    return Y if name == 'x' else X


def swap_variables(f):
    """Exchanges x and y in a quantifier-free formula."""
    return substitute_terms(f, {'x': Y, 'y': X})


def drop_vacuous(f):
    """Removes quantifiers whose variable does not occur free in their body (universes are non-empty)."""
    if isinstance(f, And):
        return conj(*(drop_vacuous(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(drop_vacuous(a) for a in f.args))
    if isinstance(f, QUANTIFIERS):
        body = drop_vacuous(f.body)
        if all(v.name != f.var.name for v in free_variables(body)):
            return body
        return type(f)(f.var, body)
    return f


def _rewrite_first(f, pick, descend_quantifiers=True):
    """Rewrites the leftmost subformula (pre-order) for which `pick` returns a replacement."""
    replacement = pick(f)
    if replacement is not None:
        return replacement, True
    if isinstance(f, (And, Or)):
        args = list(f.args)
        for i, arg in enumerate(args):
            new, done = _rewrite_first(arg, pick, descend_quantifiers)
            if done:
                args[i] = new
                return (conj if isinstance(f, And) else disj)(*args), True
    elif isinstance(f, QUANTIFIERS) and descend_quantifiers:
        new, done = _rewrite_first(f.body, pick, descend_quantifiers)
        if done:
            return type(f)(f.var, new), True
    return f, False


def _replace_all(f, old, new):
    if f == old:
        return new
    if isinstance(f, And):
        return conj(*(_replace_all(a, old, new) for a in f.args))
    if isinstance(f, Or):
        return disj(*(_replace_all(a, old, new) for a in f.args))
    if isinstance(f, QUANTIFIERS):
        return type(f)(f.var, _replace_all(f.body, old, new))
    return f


def _prefix_form(f):
    """
    Matches ∀x Qy ε, ∀x ε and their x/y mirror images.

    Returns:
        tuple or None: ('forall', ε) or ('exists', ε) with ε oriented so that
        the universal variable is x.
    """
    if not isinstance(f, Forall):
        return None
    if is_quantifier_free(f.body):
        return 'forall', f.body
    inner = f.body
    if isinstance(inner, QUANTIFIERS) and inner.var.name != f.var.name and is_quantifier_free(inner.body):
        if isinstance(inner, Forall):
            return 'forall', inner.body
        return 'exists', inner.body if f.var.name == 'x' else swap_variables(inner.body)
    return None


def _hoist(f):
    """∀z1 (... Qz2 δ ...) with a Boolean body -> ∀z1 Qz2 (... δ ...)."""
    if not isinstance(f, Forall) or not isinstance(f.body, (And, Or)):
        return None
    combine = conj if isinstance(f.body, And) else disj
    for i, arg in enumerate(f.body.args):
        if isinstance(arg, QUANTIFIERS) and arg.var.name != f.var.name:
            rest = list(f.body.args)
            rest[i] = arg.body
            return Forall(f.var, type(arg)(arg.var, combine(*rest)))
    return None


def _conjuncts(f):
    return list(f.args) if isinstance(f, And) else [f]


class ScottNormalizer:
    """
    Accumulates one SSNF sentence.

    Args:
        taken (set): Symbol names the fresh F_i, E_i and constants must avoid.
        economical (bool): Try the rearranging steps before auxiliary relations.
        introduce_constants (bool): Witness outermost existentials with fresh
            constants; otherwise read ∃z δ as ∀z̄ ∃z δ.
    """

    def __init__(self, taken, economical=True, introduce_constants=True):
        self.taken = set(taken)
        self.economical = economical
        self.introduce_constants = introduce_constants
        self.alpha = []
        self.exist_parts = []
        self.auxiliary = []
        self.fresh_constants = []
        self.steps = {k: 0 for k in range(1, 7)}

    def _fresh(self, stem):
        k = 1
        while f"{stem}_{k}" in self.taken:
            k += 1
        name = f"{stem}_{k}"
        self.taken.add(name)
        return name

    def add_forall(self, matrix):
        self.alpha.append(matrix)

    def add_exists(self, beta):
        """Adds ∀x∃y β as F(x,y) → β together with ∀x∃y F(x,y)."""
        if isinstance(beta, TrueF):
            return
        self.exist_parts.append((self._fresh('F'), beta))

    def absorb(self, form):
        kind, body = form
        if kind == 'forall':
            self.add_forall(body)
        else:
            self.add_exists(body)

    # Steps

    def absorb_prefix(self, phi):
        form = _prefix_form(phi)
        if form is None:
            return None
        self.absorb(form)
        self.steps[1] += 1
        return TRUE

    def absorb_conjunct(self, phi):
        if not isinstance(phi, And):
            return None
        parts = _conjuncts(phi)
        for i, part in enumerate(parts):
            form = _prefix_form(part)
            if form is not None:
                self.absorb(form)
                self.steps[2] += 1
                return conj(*(parts[:i] + parts[i + 1:]))
        return None

    def witness_existential(self, phi):
        if self.introduce_constants:
            def pick(node):
                if isinstance(node, Exists):
                    const = Const(self._fresh('c'), DOM)
                    self.fresh_constants.append(const)
                    return substitute_terms(node.body, {node.var.name: const})
                return None
            new, done = _rewrite_first(phi, pick, descend_quantifiers=False)
        else:
            # ∃z δ read as ∀z̄ ∃z δ: a conjunct with quantifier-free δ is a ∀∃ part.
            parts = _conjuncts(phi)
            done = False
            for i, part in enumerate(parts):
                if isinstance(part, Exists) and is_quantifier_free(part.body):
                    body = part.body if part.var.name == 'y' else swap_variables(part.body)
                    self.add_exists(body)
                    del parts[i]
                    done = True
                    break
            new = conj(*parts)
        if not done:
            return None
        self.steps[3] += 1
        return new

    def hoist_quantifier(self, phi):
        parts = _conjuncts(phi)
        for i, part in enumerate(parts):
            hoisted = _hoist(part)
            if hoisted is not None:
                parts[i] = hoisted
                self.steps[4] += 1
                return conj(*parts)
        return None

    def absorb_residue(self, phi):
        if not is_quantifier_free(phi):
            return None
        self.add_forall(phi)
        self.steps[5] += 1
        return TRUE

    def introduce_auxiliary(self, phi):
        found = []

        def pick(node):
            if isinstance(node, QUANTIFIERS) and is_quantifier_free(node.body):
                found.append(node)
                return node
            return None

        _rewrite_first(phi, pick)
        if not found:
            raise NormalizationError("no innermost quantifier left to replace")
        node = found[0]
        delta = node.body
        outer = _other(node.var.name)
        name = self._fresh('E')
        self.auxiliary.append(name)
        marker = Atom(name, (outer,))
        # ∀z̄ (Qz δ ↔ E(z̄)) split into its ∀∀ and ∀∃ halves.
        if isinstance(node, Forall):
            both = disj(neg(marker), delta)
            some = disj(marker, nnf(delta, negate=True))
        else:
            both = disj(nnf(delta, negate=True), marker)
            some = disj(neg(marker), delta)
        self.add_forall(both)
        self.add_exists(some if outer.name == 'x' else swap_variables(some))
        self.steps[6] += 1
        return _replace_all(phi, node, marker)

    def step(self, phi):
        if not self.economical:
            rules = (self.absorb_residue, self.introduce_auxiliary)
        else:
            rules = (self.absorb_prefix, self.absorb_conjunct, self.witness_existential,
                     self.hoist_quantifier, self.absorb_residue, self.introduce_auxiliary)
        for rule in rules:
            new = rule(phi)
            if new is not None:
                return new
        raise NormalizationError(f"no normalization step applies to {phi!r}")


def to_ssnf(phi, economical=True, introduce_constants=True, vocabulary=None):
    """
    Brings an FO² sentence into Skolemized Scott normal form.

    The result has the same model cardinalities as `phi`: every model of the
    result reduces to a model of `phi` of the same size, and every model of
    `phi` expands to one of the result.

    Args:
        phi (Formula): A sentence using only the variables x and y.
        economical (bool): Use the rearranging steps; when false every
            quantifier gets an auxiliary relation.
        introduce_constants (bool): Witness outermost existentials with fresh
            constants (use false for constant-free input to the encoder).
        vocabulary (Vocabulary, optional): Symbols to keep in the result's
            vocabulary even when `phi` does not mention them.

    Returns:
        SsnfSentence: The normal form.

    Raises:
        NormalizationError: When `phi` has free variables or leaves FO².
    """
    try:
        check_fo2(phi)
    except LoweringError as exc:
        raise NormalizationError(str(exc)) from exc
    free = free_variables(phi)
    if free:
        raise NormalizationError(f"not a sentence: free {', '.join(sorted(v.name for v in free))}")

    base = vocabulary_of(phi, vocabulary)
    normalizer = ScottNormalizer(set(base.relations) | set(base.constants), economical, introduce_constants)
    current = drop_vacuous(nnf(simplify(phi)))
    limit = 10 * formula_size(current) + 10
    iterations = 0
    while not isinstance(current, TrueF):
        iterations += 1
        if iterations > limit:
            raise NormalizationError(f"normalization did not terminate after {limit} steps")
        current = drop_vacuous(normalizer.step(current))

    alpha = simplify(conj(*normalizer.alpha))
    parts = tuple((name, simplify(beta)) for name, beta in normalizer.exist_parts)
    binary = (DOM, DOM)
    full = base.with_relations({name: (DOM,) for name in normalizer.auxiliary})
    full = full.with_relations({name: binary for name, _ in parts})
    full = full.with_constants({c.name: DOM for c in normalizer.fresh_constants})
    constants = sorted(constants_of(phi) | set(normalizer.fresh_constants), key=lambda c: c.name)
    logger.debug(f"ssnf: m={len(parts)}, {len(normalizer.auxiliary)} auxiliary, "
                 f"{len(normalizer.fresh_constants)} fresh constants, steps {normalizer.steps}")
    return SsnfSentence(alpha, parts, tuple(constants), tuple(normalizer.auxiliary), full)


def skolem_expansion(psi, structure):
    """
    Expands `structure` by F_i := the pairs satisfying β_i.

    This is the largest choice of each F_i compatible with F_i → β_i, so the
    expansion satisfies `psi` whenever any interpretation of the F_i does.
    """
    carrier = structure.carrier(DOM)
    skolem = {}
    for name, beta in psi.exist_parts:
        skolem[name] = frozenset((a, b) for a in carrier for b in carrier
                                 if evaluate(structure, beta, {'x': a, 'y': b}))
    relations = dict(structure.relations)
    relations.update(skolem)
    return Structure(psi.vocabulary, structure.universe, relations, structure.constants)


def ssnf_model_sizes(psi, max_n, cap=None):
    """Sizes n <= max_n at which `psi` has a model (brute force over everything but the F_i)."""
    skolem = set(psi.skolem_relations)
    free = psi.vocabulary.restrict(relations=[r for r in psi.vocabulary.relations if r not in skolem])
    formula = psi.to_formula()
    sizes = set()
    for n in range(1, max_n + 1):
        if any(evaluate(skolem_expansion(psi, s), formula) for s in enumerate_structures(free, n, cap=cap)):
            sizes.add(n)
    return sizes


def ssnf_cardinality_check(phi, psi, max_n, cap=None):
    """
    Whether `phi` and its normal form `psi` have models at the same sizes up to `max_n`.

    Raises:
        ResourceLimitError: When a size has more structures than `cap`.
    """
    voc = psi.vocabulary.restrict(relations=vocabulary_of(phi).relations, constants=vocabulary_of(phi).constants)
    formula_sizes = set()
    for n in range(1, max_n + 1):
        if any(evaluate(s, phi) for s in enumerate_structures(voc, n, cap=cap)):
            formula_sizes.add(n)
    return formula_sizes == ssnf_model_sizes(psi, max_n, cap=cap)


def ssnf_to_text(psi):
    """Readable rendering used by `--emit-ssnf`."""
    lines = [f"alpha: {to_text(psi.alpha)}"]
    for name, beta in psi.exist_parts:
        lines.append(f"{name}: forall x exists y {name}(x,y);  {name}(x,y) -> {to_text(beta)}")
    if psi.constants:
        lines.append(f"constants: {', '.join(c.name for c in psi.constants)}")
    if psi.auxiliary:
        lines.append(f"auxiliary: {', '.join(psi.auxiliary)}")
    return '\n'.join(lines)


__all__ = ['to_ssnf', 'ssnf_cardinality_check', 'ssnf_model_sizes', 'skolem_expansion',
           'swap_variables', 'drop_vacuous', 'ssnf_to_text', 'ScottNormalizer']
