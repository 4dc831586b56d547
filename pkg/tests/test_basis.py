from fractions import Fraction

import pytest
from hypothesis import given, settings

from services import FreeLabService
from services.errors import BasisError, FreeLabError
from services.projections import (
    basis_constant,
    basis_vectors,
    conditionality_growth,
    find_divergent_chains,
    ledger_from_system,
    lemma41_witness,
    projections_from_coefficients,
    projections_from_system,
    signed_sum_norm,
    signed_sum_operator,
    unconditional_constant,
    verify_family,
)
from services.retractions import Chain, basis_molecules, chain_to, row_major_grid_system
from services.spaces import build_grid_net
from tests.conftest import circle_systems


def test_c4_basis_constant(c4_system):
    result = basis_constant(projections_from_system(c4_system))
    assert result.per_n == [0, 1, 1, 2, 1]
    assert result.value == 2


def test_c4_unconditional_constant_exhaustive(c4_system):
    family = projections_from_system(c4_system)
    result = unconditional_constant(family, "exhaustive")
    assert result.value == 3
    assert result.eps == (1, 1, 1, -1)
    assert result.patterns == 8
    assert not result.lower_bound
    assert signed_sum_norm(family, (1, -1, 1, -1)) == 3
    assert signed_sum_norm(family, (1, 1, 1, 1)) == 1
    assert signed_sum_norm(family, (1, -1, -1, -1)) == Fraction(3, 2)


def test_sampled_mode_is_seeded(c4_system):
    family = projections_from_system(c4_system)
    first = unconditional_constant(family, "sampled", samples=10, seed=7)
    second = unconditional_constant(family, "sampled", samples=10, seed=7)
    assert (first.value, first.eps) == (second.value, second.eps)
    assert first.lower_bound
    assert first.eps[0] == 1
    assert first.value <= 3


def test_unconditional_rejects_bad_input(c4_system):
    family = projections_from_system(c4_system)
    with pytest.raises(BasisError):
        unconditional_constant(family, "greedy")
    with pytest.raises(BasisError):
        unconditional_constant(family, "exhaustive", cap=2)
    with pytest.raises(BasisError):
        signed_sum_operator(family, (1, 1))
    with pytest.raises(BasisError):
        signed_sum_operator(family, (1, 0, 1, 1))


def test_retractional_family_is_schauder(c4_system):
    report = verify_family(projections_from_system(c4_system), with_norms=True)
    assert report.valid
    assert report.ranks == [0, 1, 2, 3, 4]
    assert report.norms == [0, 1, 1, 2, 1]


def test_coefficient_family_matches_retractions(c4_system):
    family = projections_from_system(c4_system)
    ledger = ledger_from_system(c4_system)
    rebuilt = projections_from_coefficients(c4_system.space, c4_system.order, ledger)
    for n in range(family.N + 1):
        assert rebuilt[n].equals(family[n])


def test_basis_vectors_are_the_molecules(c4_system):
    ledger = ledger_from_system(c4_system)
    vectors = basis_vectors(c4_system.space, c4_system.order, ledger)
    for vector, molecule in zip(vectors, basis_molecules(c4_system)):
        assert vector.equals(molecule)


def test_ledger_must_reference_earlier_indices(c4_system):
    ledger = ledger_from_system(c4_system)
    ledger[2] = {3: 1}
    with pytest.raises(BasisError):
        projections_from_coefficients(c4_system.space, c4_system.order, ledger)


def test_divergent_chains_deepest_first():
    system = row_major_grid_system(build_grid_net(3))
    pairs = find_divergent_chains(system, 1)
    assert pairs
    assert pairs[0].n == 3
    assert all(a.n >= b.n for a, b in zip(pairs, pairs[1:]))


def test_witness_requires_base_chains():
    system = row_major_grid_system(build_grid_net(2))
    space = system.space
    S = chain_to(system, space.index("(0,2)"))
    T = Chain(chain_to(system, space.index("(1,2)")).points[1:])
    with pytest.raises(BasisError):
        lemma41_witness(system, S, T, 1)


@pytest.mark.parametrize("m", [2, 3, 4, pytest.param(5, marks=pytest.mark.slow)])
def test_grid_witness_certifies_growth(m):
    (row,) = conditionality_growth([m])
    assert row.n == m
    assert row.bound == pytest.approx(m - 1)
    assert row.certified >= row.bound - 1e-9
    assert row.signed_sum_norm >= row.certified - 1e-9


@pytest.mark.slow
def test_grid_conditionality_grows():
    rows = conditionality_growth([3, 4, 5, 6])
    norms = [row.signed_sum_norm for row in rows]
    assert all(b > a for a, b in zip(norms, norms[1:]))
    for row in rows:
        assert row.signed_sum_norm >= row.bound - 1e-9


def test_service_witness_and_errors(c4_system):
    service = FreeLabService(threads=1)
    S, T, witness = service.conditionality_witness(row_major_grid_system(build_grid_net(3)), 1)
    assert witness.n == 3
    assert len(witness.eps) == (4 * 4) - 1
    with pytest.raises(FreeLabError):
        service.conditionality_witness(c4_system, "1/2")


def test_c4_divergent_pair(c4_system):
    pairs = find_divergent_chains(c4_system, 1)
    assert [(p.x, p.y, p.n) for p in pairs] == [(3, 4, 2)]
    both = find_divergent_chains(c4_system, 1, both_orientations=True)
    assert [(p.x, p.y, p.n) for p in both] == [(3, 4, 2)]


def test_reversed_grid_pairs_run_deeper():
    system = row_major_grid_system(build_grid_net(3))
    space = system.space
    forward = find_divergent_chains(system, 1)
    both = find_divergent_chains(system, 1, both_orientations=True)
    assert forward[0].n == 3
    assert both[0].n == 4
    assert (space.label(both[0].x), space.label(both[0].y)) == ("(1,3)", "(0,3)")
    assert system.position[both[0].x] > system.position[both[0].y]
    assert {(p.x, p.y, p.n) for p in forward} <= {(p.x, p.y, p.n) for p in both}


def test_grid_witness_reference_pair():
    system = row_major_grid_system(build_grid_net(3))
    space = system.space
    S = chain_to(system, space.index("(1,3)"))
    T = chain_to(system, space.index("(2,3)"))
    witness = lemma41_witness(system, S, T, 1)
    assert witness.n == 3
    assert witness.bound == pytest.approx(2)
    values = {space.label(x): v for x, v in enumerate(witness.f.values) if v != 0}
    assert values == {"(1,1)": -0.5, "(1,2)": 0.5, "(1,3)": -0.5}
    with pytest.raises(BasisError):
        lemma41_witness(system, S, S, 1)


@settings(max_examples=10, deadline=None)
@given(circle_systems(max_n=5))
def test_basis_constant_is_below_the_unconditional_constant(system):
    family = projections_from_system(system)
    assert basis_constant(family).value <= unconditional_constant(family, "exhaustive").value
