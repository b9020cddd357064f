from itertools import product

import numpy as np
import pytest
from sympy.physics.quantum.cg import CG

from tfn.so3 import (
    CGTable,
    admissible,
    cg_commutation_residual,
    clebsch_gordan_table,
    complex_clebsch_gordan,
    complex_to_real_basis,
    real_clebsch_gordan,
)


def _m_values(l):
    return range(-l, l + 1)


@pytest.mark.parametrize("j1,j2,j", [(1, 1, 0), (1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 1, 3), (2, 2, 2), (1, 2, 1)])
def test_complex_coefficients_match_sympy(j1, j2, j):
    for m1, m2 in product(_m_values(j1), _m_values(j2)):
        m = m1 + m2
        if abs(m) > j:
            continue
        expected = float(CG(j1, m1, j2, m2, j, m).doit())
        assert complex_clebsch_gordan(j1, m1, j2, m2, j, m) == pytest.approx(expected, abs=1e-14)


def test_complex_coefficients_vanish_off_selection():
    assert complex_clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert complex_clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0


def test_selection_rule():
    assert admissible(1, 1, 1)
    assert admissible(0, 2, 2)
    assert not admissible(3, 1, 1)
    assert not admissible(0, 1, 2)
    assert not np.any(real_clebsch_gordan(0, 1, 2))
    assert real_clebsch_gordan(0, 1, 2).shape == (1, 3, 5)


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_basis_change_is_unitary(l):
    q = complex_to_real_basis(l)
    assert np.allclose(q @ q.conj().T, np.eye(2 * l + 1), atol=1e-14)


def test_real_blocks_are_real_and_read_only():
    block = real_clebsch_gordan(1, 1, 1)
    assert block.dtype == np.float64
    with pytest.raises(ValueError):
        block[0, 0, 0] = 1.0


def test_scalar_coupling_is_the_normalised_dot_product():
    block = real_clebsch_gordan(0, 1, 1)[0]
    assert np.allclose(np.abs(block), np.eye(3) / np.sqrt(3.0), atol=1e-14)


def test_table_contents(cg_table):
    assert len(cg_table) == sum(admissible(*key) for key in product(range(3), repeat=3))
    assert (1, 1, 1) in cg_table
    assert (2, 1, 0) not in cg_table
    assert not np.any(cg_table[(2, 1, 0)])
    with pytest.raises(KeyError):
        cg_table[(3, 1, 2)]


def test_table_is_cached():
    assert clebsch_gordan_table(2) is clebsch_gordan_table(2)


def test_orthogonality(cg_table):
    assert cg_table.orthogonality_residual() < 1e-12


def test_commutation_with_rotations(cg_table, rotations):
    worst = max(cg_commutation_residual(cg_table, key, rotation) for key in cg_table.keys() for rotation in rotations)
    assert worst < 1e-9


def test_dump_lists_nonzero_coefficients():
    table = CGTable(1)
    dump = table.dump()
    assert dump.l_max == 1
    assert dump.records
    assert all(abs(record.value) > 1e-15 for record in dump.records)
    for record in dump.records:
        assert table[(record.l_o, record.l_f, record.l_i)][
            record.m_o + record.l_o, record.m_f + record.l_f, record.m_i + record.l_i
        ] == pytest.approx(record.value)


def test_negative_l_max_is_rejected():
    with pytest.raises(ValueError):
        CGTable(-1)
