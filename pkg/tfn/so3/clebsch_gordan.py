"""
Real Clebsch-Gordan coefficients.

Complex coefficients come from Racah's closed-form sum (exact rational
arithmetic), and are then conjugated into the real spherical-harmonic basis
of ``spherical_harmonics``. Blocks are indexed (l_o, l_f, l_i) and have shape
[2 l_o + 1, 2 l_f + 1, 2 l_i + 1]:

    (u (x) v)^(l_o)_{m_o} = sum_{m_f, m_i} C[m_o, m_f, m_i] u_{m_f} v_{m_i}
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Tuple

import numpy as np
from scipy.special import factorial

from shared.models.tables import CGDump, CGRecord

from .rotation import Rotation

logger = logging.getLogger(__name__)

BlockKey = Tuple[int, int, int]

IMAGINARY_TOLERANCE = 1e-10


def _fact(n: int) -> int:
    return factorial(n, exact=True)


def admissible(l_o: int, l_f: int, l_i: int) -> bool:
    """Selection rule |l_f - l_i| <= l_o <= l_f + l_i."""
    return min(l_o, l_f, l_i) >= 0 and abs(l_f - l_i) <= l_o <= l_f + l_i


def complex_clebsch_gordan(j1: int, m1: int, j2: int, m2: int, j: int, m: int) -> float:
    """
    <j1 m1; j2 m2 | j m> for integer angular momenta (Condon-Shortley phase).
    """
    if m1 + m2 != m or not admissible(j, j1, j2):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0

    radicand = Fraction(
        (2 * j + 1) * _fact(j + j1 - j2) * _fact(j - j1 + j2) * _fact(j1 + j2 - j),
        _fact(j1 + j2 + j + 1),
    ) * (
        _fact(j + m) * _fact(j - m) * _fact(j1 - m1) * _fact(j1 + m1) * _fact(j2 - m2) * _fact(j2 + m2)
    )

    k_min = max(0, j2 - j - m1, j1 - j + m2)
    k_max = min(j1 + j2 - j, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denominator = (
            _fact(k)
            * _fact(j1 + j2 - j - k)
            * _fact(j1 - m1 - k)
            * _fact(j2 + m2 - k)
            * _fact(j - j2 + m1 + k)
            * _fact(j - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, denominator)

    # sqrt(radicand) * total, with the sign carried by total
    return float(np.sign(total)) * float(np.sqrt(float(radicand * total * total)))


@lru_cache(maxsize=None)
def complex_to_real_basis(l: int) -> np.ndarray:
    """
    Unitary Q with Y_real = Q @ Y_complex, rows and columns ordered m = -l..l.
    """
    q = np.zeros((2 * l + 1, 2 * l + 1), dtype=np.complex128)
    s = 1.0 / np.sqrt(2.0)
    for m in range(-l, l + 1):
        row = m + l
        if m > 0:
            q[row, l + m] = (-1) ** m * s
            q[row, l - m] = s
        elif m < 0:
            k = -m
            q[row, l - k] = 1j * s
            q[row, l + k] = -1j * (-1) ** k * s
        else:
            q[row, l] = 1.0
    return q


@lru_cache(maxsize=None)
def real_clebsch_gordan(l_o: int, l_f: int, l_i: int) -> np.ndarray:
    """
    Real-basis coefficient block for coupling l_f (x) l_i -> l_o.

    Returns zeros when the selection rule forbids the coupling.

    Raises:
        ArithmeticError: If the change of basis leaves an imaginary residue
    """
    shape = (2 * l_o + 1, 2 * l_f + 1, 2 * l_i + 1)
    if not admissible(l_o, l_f, l_i):
        return np.zeros(shape)

    complex_block = np.zeros(shape, dtype=np.complex128)
    for m_o, m_f, m_i in product(range(-l_o, l_o + 1), range(-l_f, l_f + 1), range(-l_i, l_i + 1)):
        complex_block[m_o + l_o, m_f + l_f, m_i + l_i] = complex_clebsch_gordan(l_f, m_f, l_i, m_i, l_o, m_o)

    block = np.einsum(
        "on,nab,fa,ib->ofi",
        complex_to_real_basis(l_o),
        complex_block,
        complex_to_real_basis(l_f).conj(),
        complex_to_real_basis(l_i).conj(),
    )

    # Blocks with odd l_o + l_f + l_i come out purely imaginary; a global
    # phase makes them real without changing the coupling.
    if np.max(np.abs(block.imag)) > np.max(np.abs(block.real)):
        block = block * -1j

    residue = float(np.max(np.abs(block.imag)))
    if residue >= IMAGINARY_TOLERANCE:
        raise ArithmeticError(
            f"real CG block ({l_o}, {l_f}, {l_i}) has imaginary residue {residue:.3e}"
        )
    result = np.ascontiguousarray(block.real)
    result.setflags(write=False)
    return result


class CGTable:
    """
    All admissible real Clebsch-Gordan blocks with every order <= l_max.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, l_max: int):
        if l_max < 0:
            raise ValueError(f"l_max must be non-negative, got {l_max}")
        self.l_max = l_max
        self._blocks: Dict[BlockKey, np.ndarray] = {}
        for l_o, l_f, l_i in product(range(l_max + 1), repeat=3):
            if admissible(l_o, l_f, l_i):
                self._blocks[(l_o, l_f, l_i)] = real_clebsch_gordan(l_o, l_f, l_i)
        logger.debug(f"Built CG table up to l_max={l_max} with {len(self._blocks)} blocks")

    def __getitem__(self, key: BlockKey) -> np.ndarray:
        l_o, l_f, l_i = key
        if max(key) > self.l_max:
            raise KeyError(f"block {key} exceeds l_max={self.l_max}")
        block = self._blocks.get(key)
        if block is None:
            return np.zeros((2 * l_o + 1, 2 * l_f + 1, 2 * l_i + 1))
        return block

    def __contains__(self, key: BlockKey) -> bool:
        return key in self._blocks

    def __len__(self) -> int:
        return len(self._blocks)

    def keys(self) -> List[BlockKey]:
        return sorted(self._blocks)

    def items(self) -> Iterator[Tuple[BlockKey, np.ndarray]]:
        for key in self.keys():
            yield key, self._blocks[key]

    def orthogonality_residual(self) -> float:
        """Max deviation of sum_{m_f,m_i} C^(l_o) C^(l_o') from the identity."""
        worst = 0.0
        for l_f, l_i in product(range(self.l_max + 1), repeat=2):
            outputs = [l_o for l_o in range(self.l_max + 1) if (l_o, l_f, l_i) in self]
            if not outputs:
                continue
            stacked = np.concatenate(
                [self[(l_o, l_f, l_i)].reshape(2 * l_o + 1, -1) for l_o in outputs], axis=0
            )
            gram = stacked @ stacked.T
            worst = max(worst, float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
        return worst

    def to_records(self, threshold: float = 0.0) -> List[CGRecord]:
        """Flat (l_o, l_f, l_i, m_o, m_f, m_i, value) records, nonzero entries only."""
        records = []
        for (l_o, l_f, l_i), block in self.items():
            for (a, b, c), value in np.ndenumerate(block):
                if abs(value) > threshold:
                    records.append(
                        CGRecord(
                            l_o=l_o, l_f=l_f, l_i=l_i,
                            m_o=a - l_o, m_f=b - l_f, m_i=c - l_i,
                            value=float(value),
                        )
                    )
        return records

    def dump(self) -> CGDump:
        return CGDump(l_max=self.l_max, records=self.to_records(threshold=1e-15))


@lru_cache(maxsize=8)
def clebsch_gordan_table(l_max: int = 2) -> CGTable:
    """Cached table of all real CG blocks up to l_max."""
    return CGTable(l_max)


def cg_commutation_residual(table: CGTable, key: BlockKey, rotation: Rotation) -> float:
    """
    Max-abs entry of C (D^(l_f) (x) D^(l_i)) - D^(l_o) C for one block.
    """
    from .wigner import wigner_d

    l_o, l_f, l_i = key
    block = table[key]
    d_o = wigner_d(l_o, rotation).matrix
    d_f = wigner_d(l_f, rotation).matrix
    d_i = wigner_d(l_i, rotation).matrix
    left = np.einsum("ofi,fa,ib->oab", block, d_f, d_i)
    right = np.einsum("op,pab->oab", d_o, block)
    return float(np.max(np.abs(left - right)))
