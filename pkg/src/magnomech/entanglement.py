"""Two-mode reductions of the steady-state covariance matrix and the
logarithmic negativity of every bipartition.

Conventions: vacuum covariance diagonal 1/2, partial transposition of the
second mode via T = diag(1, -1, 1, 1), and E_N = max(0, -ln(2 nu)) with nu
the minimum symplectic eigenvalue of the partially transposed two-mode
covariance. nu is evaluated in closed form from the 2x2 block determinants,
which is exact and better conditioned than diagonalizing i Omega C at this
size. A state is separable iff nu >= 1/2, for which E_N clamps to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import MODE_INDICES, MODES
from .errors import UnphysicalInput

# Absolute slack on the determinant conditions, absorbing Lyapunov round-off.
DETERMINANT_SLACK = 1e-10


@dataclass(frozen=True)
class ModePair:
    """Unordered pair of distinct mode labels; canonical order is applied."""

    first: str
    second: str

    def __post_init__(self) -> None:
        for label in (self.first, self.second):
            if label not in MODES:
                raise ValueError(f"unknown mode label {label!r}; "
                                 f"expected one of {MODES}")
        if self.first == self.second:
            raise ValueError("pair modes must be distinct")
        if MODES.index(self.first) > MODES.index(self.second):
            first, second = self.second, self.first
            object.__setattr__(self, "first", first)
            object.__setattr__(self, "second", second)

    @property
    def label(self) -> str:
        return self.first + self.second


PAIRS: tuple[ModePair, ...] = tuple(
    ModePair(MODES[i], MODES[j])
    for i in range(len(MODES)) for j in range(i + 1, len(MODES))
)

_LABEL_TO_PAIR = {p.label: p for p in PAIRS}
_LABEL_TO_PAIR.update({p.second + p.first: p for p in PAIRS})


def pair_from_label(label: str) -> ModePair:
    """Parse a pair label such as 'be' or 'c1m' (either mode order)."""
    try:
        return _LABEL_TO_PAIR[label]
    except KeyError:
        raise ValueError(
            f"unknown pair label {label!r}; expected one of "
            f"{sorted(p.label for p in PAIRS)}") from None


@dataclass(frozen=True)
class EntanglementResult:
    """Logarithmic negativity of one bipartition.

    nu_minus is the minimum symplectic eigenvalue of the partially transposed
    reduced covariance; E_N = max(0, -ln(2 nu_minus)).
    """

    pair: ModePair | None
    nu_minus: float
    E_N: float
    stable: bool = True


def reduce_covariance(C: np.ndarray, pair: ModePair) -> np.ndarray:
    """4x4 covariance of one mode pair in the shared quadrature ordering."""
    idx = MODE_INDICES[pair.first] + MODE_INDICES[pair.second]
    return C[np.ix_(idx, idx)]


def _det2(M: np.ndarray) -> float:
    return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])


_EPS = float(np.finfo(float).eps)


def log_negativity(C4: np.ndarray, pair: ModePair | None = None,
                   *, slack: float = DETERMINANT_SLACK) -> EntanglementResult:
    """Logarithmic negativity of a two-mode covariance matrix.

    With block form [[A, C], [C^T, B]], partial transposition flips the sign
    of det C, so nu_minus^2 = (S - sqrt(S^2 - 4 det C4)) / 2 with
    S = det A + det B - 2 det C. Raises UnphysicalInput when the determinant
    conditions fail beyond the absolute slack plus the floating-point noise
    floor of the determinant arithmetic (hot thermal covariances push the
    determinants to 1e5 and beyond, where a purely absolute slack misfires).
    """
    tag = f" for pair {pair.label}" if pair is not None else ""
    block_a = _det2(C4[:2, :2])
    block_b = _det2(C4[2:, 2:])
    block_c = _det2(C4[:2, 2:])
    det4 = float(np.linalg.det(C4))
    scale = float(np.abs(C4).max())
    det_floor = slack + 64.0 * _EPS * scale**4
    if det4 <= -det_floor:
        raise UnphysicalInput(
            f"covariance determinant {det4:.3e} is not positive{tag}")
    sigma = block_a + block_b - 2.0 * block_c
    disc = sigma * sigma - 4.0 * det4
    disc_floor = slack + 64.0 * _EPS * (sigma * sigma + 4.0 * abs(det4))
    if disc < -disc_floor:
        raise UnphysicalInput(
            f"symplectic discriminant {disc:.3e} is negative{tag}")
    nu_sq = 0.5 * (sigma - math.sqrt(max(disc, 0.0)))
    if nu_sq <= 0.0:
        if nu_sq < -(slack + 64.0 * _EPS * abs(sigma)):
            raise UnphysicalInput(
                f"squared symplectic eigenvalue {nu_sq:.3e} is negative{tag}")
        raise UnphysicalInput(
            f"minimum symplectic eigenvalue vanished{tag} "
            "(covariance is singular)")
    nu = math.sqrt(nu_sq)
    return EntanglementResult(pair=pair, nu_minus=nu,
                              E_N=max(0.0, -math.log(2.0 * nu)))


def all_pairs_entanglement(C: np.ndarray) -> list[EntanglementResult]:
    """Logarithmic negativity of all ten bipartitions, in canonical pair order."""
    return [log_negativity(reduce_covariance(C, pair), pair) for pair in PAIRS]
