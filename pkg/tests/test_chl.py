import pytest

from backend.models import GrowthRow
from chl import (
    check_cyclicity,
    chl_mirror_object,
    chl_relations_and_potential,
    chl_superpotential,
    growth_threshold,
    parse_product_table,
    serialize_product_table,
    slow_growth_audit,
)
from disks import deformed_complement, product_table
from errors import CHLError
from ncpoly import cyclic_derivative

SWAP_TABLE = "\n".join([
    "objects: L1",
    "odd: a L1 L1",
    "odd: b L1 L1",
    "arity_cap: 1",
    "q_order: 1",
    "mu: X_a -> (+1 -1*qa)*Y_b",
    "mu: X_b -> (+1 -1*qa)*Y_a",
]) + "\n"


def test_parse_and_serialize():
    table = parse_product_table(SWAP_TABLE)
    assert table.objects == ("L1",)
    assert table.q_order == 1
    assert serialize_product_table(table) == SWAP_TABLE


def test_superpotential_and_relations_of_a_table():
    table = parse_product_table(SWAP_TABLE)
    w = chl_superpotential(table)
    assert w.serialize() == "+1*[a b] +1*[b a] -1*qa*[a b] -1*qa*[b a]"
    relations, ell = chl_relations_and_potential(table)
    assert relations["a"].serialize() == "+1*[b] -1*qa*[b]"
    assert ell.is_zero()


def test_cyclicity_violation_is_reported():
    text = SWAP_TABLE.replace("mu: X_b -> (+1 -1*qa)*Y_a\n", "")
    table = parse_product_table(text)
    verdict = check_cyclicity(table)
    assert verdict.status == "CYCLICITY_VIOLATION"
    assert verdict.witness["word"] == "b a"
    with pytest.raises(CHLError) as exc:
        chl_superpotential(table)
    assert exc.value.code == "CYCLICITY_VIOLATION"


def test_parse_errors():
    with pytest.raises(CHLError) as exc:
        parse_product_table("objects L1\n")
    assert exc.value.code == "PARSE_ERROR"
    with pytest.raises(CHLError) as exc:
        parse_product_table("objects: L1\nodd: a L1 L1\nmu: a -> 0\n")
    assert exc.value.code == "PARSE_ERROR"


def test_stored_words_must_compose():
    text = "objects: L1 L2\nodd: x L1 L2\nmu: X_x X_x -> 0\n"
    with pytest.raises(CHLError) as exc:
        parse_product_table(text)
    assert exc.value.code == "NON_COMPOSABLE"


def test_table_of_sphere3_rebuilds_mirror_data(sphere3, sphere3_mirror):
    table = product_table(sphere3, 1, dq=sphere3_mirror)
    w = chl_superpotential(table)
    relations, ell = chl_relations_and_potential(table)
    assert relations["b"] == cyclic_derivative(w, "b")
    assert ell.serialize() == "+1*[a b c] -1*qa*[a] -1*qb*[b] -1*qc*[c]"
    mf = chl_mirror_object(table, "a")
    assert mf.f.serialize() == "+1*[a]"
    assert mf.g == deformed_complement("a", sphere3, 1, sphere3_mirror)


def test_classical_table_drops_deformations(sphere3, sphere3_mirror):
    classical = product_table(sphere3, 1, dq=sphere3_mirror).at_zero()
    assert classical.q_order == 0
    assert all(c.valuation() == 0 for out in classical.entries.values() for c in out.values())


def test_mirror_object_needs_an_arrow(sphere3, sphere3_mirror):
    table = product_table(sphere3, 1, dq=sphere3_mirror)
    with pytest.raises(CHLError) as exc:
        chl_mirror_object(table, "z")
    assert exc.value.code == "NOT_AN_ARC"


def test_growth_audit():
    table = parse_product_table(SWAP_TABLE)
    rows = slow_growth_audit(table)
    assert rows == [GrowthRow(arity=1, entries=2, min_q_order=0)]
    rows = [
        GrowthRow(arity=1, entries=1, min_q_order=2),
        GrowthRow(arity=2, entries=1, min_q_order=0),
        GrowthRow(arity=3, entries=1, min_q_order=1),
    ]
    assert growth_threshold(rows) == 2
