"""Two-qubit states: Bell-diagonal triples, Bloch data and classical states.

Basis order is |00>, |01>, |10>, |11> with qubit A as the left tensor factor.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qfreeze.errors import InvalidParam, InvalidProbabilities, InvalidTriple
from qfreeze.linalg import I2, I4, PAULI, SY, bloch_operator, dagger, tensor2

TETRAHEDRON_TOL = 1e-12

_s2 = 1 / np.sqrt(2)
PHI_PLUS = np.array([_s2, 0, 0, _s2], dtype=complex)
PHI_MINUS = np.array([_s2, 0, 0, -_s2], dtype=complex)
PSI_PLUS = np.array([0, _s2, _s2, 0], dtype=complex)
PSI_MINUS = np.array([0, _s2, -_s2, 0], dtype=complex)
# columns ordered as the Bell eigenvalues returned by BDTriple.bell_eigenvalues
BELL_BASIS = np.stack([PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS], axis=1)

SIGMA_SIGMA = tuple(tensor2(s, s) for s in PAULI)


def bell_eigenvalues(c1, c2, c3):
    """Eigenvalues of a BD state on |Phi+>, |Phi->, |Psi+>, |Psi->.

    Works elementwise on arrays, which the axis search relies on.
    """
    return np.stack(
        np.broadcast_arrays(
            (1 + c1 - c2 + c3) / 4,
            (1 - c1 + c2 + c3) / 4,
            (1 + c1 + c2 - c3) / 4,
            (1 - c1 - c2 - c3) / 4,
        ),
        axis=-1,
    )


class BDTriple(NamedTuple):
    """Correlation triple ``{c1, c2, c3}`` of a Bell-diagonal state."""

    c1: float
    c2: float
    c3: float

    def bell_eigenvalues(self):
        return bell_eigenvalues(*map(float, self))

    def is_valid(self):
        return bool(np.all(self.bell_eigenvalues() >= -TETRAHEDRON_TOL))

    def check(self):
        lam = self.bell_eigenvalues()
        if np.any(lam < -TETRAHEDRON_TOL):
            raise InvalidTriple(
                f"triple {tuple(self)} violates the tetrahedron constraint: "
                f"Bell eigenvalues {np.round(lam, 12).tolist()}"
            )
        return self

    @classmethod
    def axis(cls, k, s):
        """Classical BD state with ``s`` on axis ``k`` (1-based) and zeros elsewhere."""
        c = [0.0, 0.0, 0.0]
        c[k - 1] = float(s)
        return cls(*c)

    def to_csv(self):
        return ",".join(repr(float(x)) for x in self)

    @classmethod
    def from_csv(cls, text):
        return cls(*(float(x) for x in text.split(",")))

    def to_json(self):
        return json.dumps([float(x) for x in self])

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if len(data) != 3:
            raise InvalidParam("a BD triple has exactly three entries")
        return cls(*(float(x) for x in data))


def bd_validate(c):
    """Tetrahedron membership and the four Bell eigenvalues."""
    lam = bell_eigenvalues(*map(float, c))
    return bool(np.all(lam >= -TETRAHEDRON_TOL)), lam


def bd_to_density(c):
    c = BDTriple(*c).check()
    rho = I4.copy()
    for ci, ss in zip(c, SIGMA_SIGMA):
        rho = rho + ci * ss
    return rho / 4


def bd_density_batch(c):
    """Densities for an ``(..., 3)`` array of triples, without validation."""
    c = np.asarray(c, dtype=float)
    out = np.broadcast_to(I4, c.shape[:-1] + (4, 4)).astype(complex)
    for i, ss in enumerate(SIGMA_SIGMA):
        out = out + c[..., i, None, None] * ss
    return out / 4


@dataclass(frozen=True)
class BlochTwoQubit:
    x: np.ndarray
    y: np.ndarray
    T: np.ndarray

    def to_density(self):
        rho = I4.copy()
        for i in range(3):
            rho = rho + self.x[i] * tensor2(PAULI[i], I2)
            rho = rho + self.y[i] * tensor2(I2, PAULI[i])
            for j in range(3):
                rho = rho + self.T[i, j] * tensor2(PAULI[i], PAULI[j])
        return rho / 4

    def spin_flipped(self):
        """The companion state with local Bloch vectors reversed."""
        return BlochTwoQubit(-self.x, -self.y, self.T.copy())


def density_to_bloch(rho):
    rho = np.asarray(rho)
    x = np.array([np.trace(rho @ tensor2(s, I2)).real for s in PAULI])
    y = np.array([np.trace(rho @ tensor2(I2, s)).real for s in PAULI])
    t = np.array([[np.trace(rho @ tensor2(a, b)).real for b in PAULI] for a in PAULI])
    return BlochTwoQubit(x, y, t)


def spin_flip(rho):
    """Apply the antiunitary (sigma_y x sigma_y) C: (x, y, T) -> (-x, -y, T)."""
    yy = tensor2(SY, SY)
    return yy @ np.conj(rho) @ yy


def _projectors(e):
    e = np.asarray(e, dtype=float)
    n = np.linalg.norm(e)
    if abs(n - 1) > 1e-12:
        raise InvalidParam(f"basis direction must be a unit vector, got norm {n}")
    return 0.5 * (I2 + bloch_operator(e)), 0.5 * (I2 - bloch_operator(e))


@dataclass(frozen=True)
class CCParam:
    """Classical-classical state: product basis from Bloch directions, joint table ``probs[i, j]``.

    Index 0 on each side is the +1 eigenvector of ``e . sigma``.
    """

    basisA: tuple
    basisB: tuple
    probs: np.ndarray


@dataclass(frozen=True)
class CQParam:
    p: float
    basisA: tuple
    rho1B: tuple
    rho2B: tuple


def make_cc(param):
    probs = np.asarray(param.probs, dtype=float).reshape(2, 2)
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
        raise InvalidProbabilities(f"joint table must be a distribution, got {probs.tolist()}")
    pa = _projectors(param.basisA)
    pb = _projectors(param.basisB)
    chi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            chi = chi + probs[i, j] * tensor2(pa[i], pb[j])
    return chi


def make_cq(param):
    if not 0 <= param.p <= 1:
        raise InvalidParam(f"p must lie in [0, 1], got {param.p}")
    for v in (param.rho1B, param.rho2B):
        if np.linalg.norm(v) > 1 + 1e-12:
            raise InvalidParam(f"Bloch vector {v} lies outside the unit ball")
    p1, p2 = _projectors(param.basisA)
    r1 = 0.5 * (I2 + bloch_operator(param.rho1B))
    r2 = 0.5 * (I2 + bloch_operator(param.rho2B))
    return param.p * tensor2(p1, r1) + (1 - param.p) * tensor2(p2, r2)


def cq_bloch(param):
    """Closed-form Bloch data ``{(2p-1)e, s+, e s-^T}`` of a CQ state."""
    e = np.asarray(param.basisA, dtype=float)
    p = param.p
    s_plus = p * np.asarray(param.rho1B) + (1 - p) * np.asarray(param.rho2B)
    s_minus = p * np.asarray(param.rho1B) - (1 - p) * np.asarray(param.rho2B)
    return BlochTwoQubit((2 * p - 1) * e, s_plus, np.outer(e, s_minus))


def random_density(seed, rank=4):
    """Ginibre-induced random state of the given rank, deterministic per seed."""
    if rank not in (1, 2, 3, 4):
        raise InvalidParam(f"rank must be 1..4, got {rank}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho).real


def is_density(rho, tol=1e-10):
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        return False
    if np.max(np.abs(rho - dagger(rho))) > tol or abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)


def pure_state(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, np.conj(psi))


def bell_projector(name):
    vec = {"phi+": PHI_PLUS, "phi-": PHI_MINUS, "psi+": PSI_PLUS, "psi-": PSI_MINUS}[name]
    return pure_state(vec)
