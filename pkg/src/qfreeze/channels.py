"""Kraus channels on two qubits: local decoherence, global rephasing and helpers."""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from qfreeze.errors import IncompleteKrausSet, InvalidAxis, InvalidParam, OutOfRangeQ, UnknownName
from qfreeze.linalg import I2, I4, PAULI, SX, SY, SZ, dagger, tensor2
from qfreeze.states import BDTriple, PHI_MINUS, PHI_PLUS, PSI_MINUS, PSI_PLUS

COMPLETENESS_TOL = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple
    label: str = ""

    def completeness_residual(self):
        acc = sum(dagger(k) @ k for k in self.kraus_ops)
        return float(np.max(np.abs(acc - np.eye(acc.shape[0]))))

    def __call__(self, rho):
        return apply_kraus(self, rho)

    def to_dict(self):
        return {
            "label": self.label,
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in self.kraus_ops],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        ops = tuple(np.array([[complex(re, im) for re, im in row] for row in k]) for k in data["kraus"])
        return cls(ops, data.get("label", ""))


def apply_kraus(ch, rho):
    """Operator-sum action ``sum_i K_i rho K_i^dagger``; works on stacks of states."""
    res = ch.completeness_residual()
    if res > COMPLETENESS_TOL:
        raise IncompleteKrausSet(f"{ch.label or 'channel'}: completeness residual {res:.3g}")
    ks = np.stack(ch.kraus_ops)
    rho = np.asarray(rho)
    out = np.einsum("kab,...bc,kdc->...ad", ks, rho, np.conj(ks))
    return 0.5 * (out + dagger(out))


@dataclass(frozen=True)
class DecoherenceParams:
    """Noise axis ``k`` and survival factor ``r = exp(-gamma t)``.

    Off-axis correlations decay as ``r**2``. ``gamma`` and ``t`` are kept
    for bookkeeping only.
    """

    k: int
    r: float
    gamma: Optional[float] = None
    t: Optional[float] = None

    def __post_init__(self):
        if self.k not in (1, 2, 3):
            raise InvalidAxis(f"noise axis must be 1, 2 or 3, got {self.k}")
        if not 0.0 <= self.r <= 1.0:
            raise InvalidParam(f"survival factor must lie in [0, 1], got {self.r}")
        if self.gamma is not None and self.t is not None:
            if abs(self.r - np.exp(-self.gamma * self.t)) > 1e-12:
                raise InvalidParam("r is inconsistent with exp(-gamma t)")

    @classmethod
    def from_rate(cls, k, gamma, t):
        if gamma < 0 or t < 0:
            raise InvalidParam("gamma and t must be nonnegative")
        return cls(k, float(np.exp(-gamma * t)), gamma, t)

    @classmethod
    def from_decay(cls, k, decay):
        """From the exponent ``Gamma`` of ``exp(-Gamma)``, the off-axis decay factor."""
        if decay < 0:
            raise InvalidParam("decay exponent must be nonnegative")
        return cls(k, float(np.exp(-decay / 2)))

    @classmethod
    def complete(cls, k):
        return cls(k, 0.0)


def local_decoherence(params):
    """Product of identical single-qubit flip channels along Pauli axis ``k``."""
    r = params.r
    if params.k not in (1, 2, 3):
        raise InvalidAxis(f"noise axis must be 1, 2 or 3, got {params.k}")
    flip = np.sqrt((1 - r) / 2) * PAULI[params.k - 1]
    keep = np.sqrt((1 + r) / 2) * I2
    single = (keep, flip)
    ops = tuple(tensor2(a, b) for a in single for b in single)
    return KrausChannel(ops, f"local_decoherence(k={params.k}, r={r:.12g})")


def evolve_triple(c0, params):
    """Closed-form action of :func:`local_decoherence` on a BD triple."""
    c = list(BDTriple(*c0))
    f = params.r ** 2
    for i in range(3):
        if i != params.k - 1:
            c[i] = c[i] * f
    return BDTriple(*c)


def global_rephasing(q):
    """Eight-operator channel routing |00>,|11> to Phi+- and |01>,|10> to Psi+-.

    Maps any state onto the BD triple ``{q, -q T33, T33}``.
    """
    if not -1.0 <= q <= 1.0:
        raise OutOfRangeQ(f"rephasing strength must lie in [-1, 1], got {q}")
    ap = np.sqrt((1 + q) / 2)
    am = np.sqrt((1 - q) / 2)
    basis = np.eye(4, dtype=complex)
    routes = ((PHI_PLUS, PHI_MINUS, 0), (PSI_PLUS, PSI_MINUS, 1), (PSI_PLUS, PSI_MINUS, 2), (PHI_PLUS, PHI_MINUS, 3))
    ops = []
    for plus, minus, col in routes:
        ops.append(ap * np.outer(plus, basis[col]))
        ops.append(am * np.outer(minus, basis[col]))
    return KrausChannel(tuple(ops), f"global_rephasing(q={q:.12g})")


def trace_b_replace_channel():
    """``X -> Tr_B[X] (x) |0><0|``, a non-unital channel."""
    ket0 = np.array([1, 0], dtype=complex)
    ops = tuple(tensor2(I2, np.outer(ket0, np.eye(2)[j])) for j in range(2))
    return KrausChannel(ops, "trace_b_replace")


_HALF_PLUS = I2 + 1j * SY
NAMED_UNITARIES = {
    "U": 0.5 * tensor2(_HALF_PLUS, _HALF_PLUS),
    "U+": 0.5 * tensor2(_HALF_PLUS, _HALF_PLUS),
    "U-": 0.5 * tensor2(SY + 1j * I2, _HALF_PLUS),
    "Ux": tensor2(SX, SX),
    "Uy": tensor2(SY, SY),
    "Uz": tensor2(SZ, SZ),
}


def named_unitary_conjugation(name, rho):
    try:
        u = NAMED_UNITARIES[name]
    except KeyError:
        raise UnknownName(f"unknown unitary {name!r}; choose from {sorted(NAMED_UNITARIES)}") from None
    return u @ np.asarray(rho) @ dagger(u)


def random_cptp(seed, kraus_count=4):
    """Random channel from a Gaussian isometry cut into ``kraus_count`` blocks."""
    if not 1 <= kraus_count <= 16:
        raise InvalidParam(f"kraus_count must be in 1..16, got {kraus_count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((4 * kraus_count, 4)) + 1j * rng.standard_normal((4 * kraus_count, 4))
    v, r = np.linalg.qr(g)
    v = v * (np.diag(r) / np.abs(np.diag(r)))
    ops = tuple(v[4 * i: 4 * (i + 1)] for i in range(kraus_count))
    return KrausChannel(ops, f"random_cptp(n={kraus_count})")


def choi_matrix(ch):
    """``sum_ij |i><j| (x) Lambda(|i><j|)`` as a 16x16 matrix."""
    d = ch.kraus_ops[0].shape[1]
    units = np.zeros((d, d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            units[i, j, i, j] = 1.0
    ks = np.stack(ch.kraus_ops)
    images = np.einsum("kab,ijbc,kdc->ijad", ks, units, np.conj(ks))
    return images.transpose(0, 2, 1, 3).reshape(d * d, d * d)


def validate_cptp(ch):
    choi = choi_matrix(ch)
    choi = 0.5 * (choi + dagger(choi))
    return {
        "completeness_residual": ch.completeness_residual(),
        "choi_min_eigenvalue": float(np.linalg.eigvalsh(choi).min()),
    }


def identity_channel():
    return KrausChannel((I4.copy(),), "identity")
