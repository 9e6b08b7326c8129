import pytest

from app.errors import NormalizationError
from app.logic.models import DOM, Var, Atom, Eq, Vocabulary, TRUE, conj, disj, neg, implies, forall, exists
from app.logic.services import evaluate, enumerate_structures, model_sizes
from app.normalizer.services import to_ssnf, ssnf_cardinality_check, ssnf_model_sizes, ssnf_to_text, drop_vacuous

X, Y, Z = Var('x'), Var('y'), Var('z')
P = lambda t: Atom('P', (t,))
R = lambda a, b: Atom('R', (a, b))
VOC = Vocabulary({'P': (DOM,), 'R': (DOM, DOM)})

SENTENCES = {
    'serial': forall(X, exists(Y, R(X, Y))),
    'guarded-serial': forall(X, implies(P(X), exists(Y, R(X, Y)))),
    'two-elements': exists(X, exists(Y, neg(Eq(X, Y)))),
    'contradiction': conj(exists(X, P(X)), forall(X, neg(P(X)))),
    'irreflexive-successor': conj(forall(X, exists(Y, conj(R(X, Y), neg(Eq(X, Y))))),
                                  forall(X, forall(Y, implies(R(X, Y), P(Y))))),
    'nested': forall(X, disj(P(X), exists(Y, conj(R(Y, X), forall(X, implies(R(Y, X), P(X))))))),
    'unique-p': conj(exists(X, P(X)), forall(X, forall(Y, implies(conj(P(X), P(Y)), Eq(X, Y)))),
                     exists(X, neg(P(X)))),
}


# --- Shape ---

def test_serial_sentence_is_already_normal():
    psi = to_ssnf(SENTENCES['serial'])
    assert psi.alpha == TRUE
    assert psi.exist_parts == (('F_1', R(X, Y)),)
    assert psi.m == 1
    assert psi.skolem_relations == ('F_1',)
    assert not psi.auxiliary and not psi.constants


def test_economical_mode_hoists_instead_of_naming():
    f = SENTENCES['guarded-serial']
    economical = to_ssnf(f)
    assert economical.m == 1
    assert not economical.auxiliary
    plain = to_ssnf(f, economical=False)
    assert plain.auxiliary
    assert plain.m >= economical.m


def test_outer_existential_becomes_constant():
    psi = to_ssnf(exists(X, P(X)))
    assert [c.name for c in psi.constants] == ['c_1']
    assert psi.m == 0
    without = to_ssnf(exists(X, P(X)), introduce_constants=False)
    assert not without.constants
    assert without.exist_parts == (('F_1', P(Y)),)


def test_fresh_names_avoid_vocabulary():
    f = conj(forall(X, exists(Y, R(X, Y))), forall(X, neg(Atom('F_1', (X,)))))
    psi = to_ssnf(f)
    assert 'F_1' not in psi.skolem_relations
    assert psi.vocabulary.arity('F_1') == 1


def test_matrix_and_formula_are_closed():
    psi = to_ssnf(SENTENCES['nested'], economical=False)
    text = ssnf_to_text(psi)
    assert text.startswith('alpha: ')
    assert 'F_1: forall x exists y F_1(x,y)' in text
    assert 'auxiliary: E_1' in text
    structure = next(iter(enumerate_structures(psi.vocabulary, 1)))
    evaluate(structure, psi.to_formula())


# --- Cardinalities ---

@pytest.mark.parametrize('name', sorted(SENTENCES))
@pytest.mark.parametrize('economical', [True, False])
def test_normal_form_preserves_model_sizes(name, economical):
    """φ and its normal form have models at the same sizes."""
    phi = SENTENCES[name]
    psi = to_ssnf(phi, economical=economical)
    assert ssnf_cardinality_check(phi, psi, 2)


def test_known_model_sizes():
    assert ssnf_model_sizes(to_ssnf(SENTENCES['two-elements']), 3) == {2, 3}
    assert ssnf_model_sizes(to_ssnf(SENTENCES['contradiction']), 2) == set()
    assert model_sizes(SENTENCES['unique-p'], VOC, 3) == {2, 3}
    assert ssnf_model_sizes(to_ssnf(SENTENCES['unique-p']), 3) == {2, 3}


# --- Errors ---

def test_free_variables_are_rejected():
    with pytest.raises(NormalizationError, match="free x"):
        to_ssnf(P(X))


def test_third_variable_is_rejected():
    with pytest.raises(NormalizationError):
        to_ssnf(exists(Z, P(Z)))


def test_drop_vacuous_quantifiers():
    assert drop_vacuous(forall(X, exists(Y, P(X)))) == forall(X, P(X))
