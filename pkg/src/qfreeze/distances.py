"""Distance functionals on two-qubit states and sampled probes of their axioms.

All functionals accept single ``(4, 4)`` matrices or stacks ``(..., 4, 4)``.
Relative entropy is in nats.
"""

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qfreeze.linalg import CLAMP_TOL, check_hermitian, dagger
from qfreeze.states import random_density

SUPPORT_TOL = 1e-12
SQRT_FLOOR = 1e-14
VIOLATION_TOL = 1e-9


class DistanceKind(enum.Enum):
    TRACE = "trace"
    BURES2 = "bures2"
    HELLINGER2 = "hellinger2"
    RELENT = "relent"
    HS2 = "hs2"

    @property
    def is_bona_fide(self):
        return self is not DistanceKind.HS2

    @property
    def is_symmetric(self):
        return self is not DistanceKind.RELENT

    @property
    def column(self):
        return "Q_" + self.value

    @classmethod
    def parse(cls, name):
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown distance kind {name!r}; choose from {[k.value for k in cls]}"
            ) from None


BONA_FIDE = tuple(k for k in DistanceKind if k.is_bona_fide)


def _psd_eigh(a):
    w, v = np.linalg.eigh(check_hermitian(a, tol=1e-10))
    return np.clip(w, 0.0, None), v


def _floor_noise(w):
    # eigenvalues at round-off level would leak ~1e-8 through a square root
    return np.where(w < SQRT_FLOOR, 0.0, w)


def _sqrtm(a):
    w, v = _psd_eigh(a)
    return (v * np.sqrt(_floor_noise(w))[..., None, :]) @ dagger(v)


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    return root_fidelity(rho, sigma) ** 2


def root_fidelity(rho, sigma):
    s = _sqrtm(rho)
    m = s @ np.asarray(sigma) @ s
    m = 0.5 * (m + dagger(m))
    eta = _floor_noise(np.clip(np.linalg.eigvalsh(m), 0.0, None))
    return np.sum(np.sqrt(eta), axis=-1)


def trace_distance(rho, sigma):
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(check_hermitian(diff, tol=1e-10))), axis=-1)


def bures2(rho, sigma):
    return np.maximum(2.0 * (1.0 - root_fidelity(rho, sigma)), 0.0)


def hellinger2(rho, sigma):
    aff = np.real(np.trace(_sqrtm(rho) @ _sqrtm(sigma), axis1=-2, axis2=-1))
    return np.maximum(2.0 * (1.0 - aff), 0.0)


def _xlogy(x, y):
    out = np.zeros(np.broadcast(x, y).shape)
    mask = np.broadcast_to(x > 0, out.shape)
    xb = np.broadcast_to(x, out.shape)
    yb = np.broadcast_to(y, out.shape)
    out[mask] = xb[mask] * np.log(yb[mask])
    return out


def relative_entropy(rho, sigma):
    """``Tr rho (ln rho - ln sigma)``, ``+inf`` when supp(rho) is not inside supp(sigma).

    Spectral form: sum_i l_i ln l_i - sum_ij l_i |<u_i|v_j>|^2 ln m_j.
    """
    lam, u = _psd_eigh(rho)
    mu, v = _psd_eigh(sigma)
    overlap = np.abs(dagger(u) @ v) ** 2
    weight = np.einsum("...i,...ij->...j", lam, overlap)
    bad = np.any((mu < SUPPORT_TOL) & (weight > SUPPORT_TOL), axis=-1)
    safe_mu = np.where(mu < SUPPORT_TOL, 1.0, mu)
    val = np.sum(_xlogy(lam, lam), axis=-1) - np.sum(weight * np.log(safe_mu), axis=-1)
    val = np.maximum(val, 0.0)
    return np.where(bad, np.inf, val)


def hilbert_schmidt2(rho, sigma):
    diff = np.asarray(rho) - np.asarray(sigma)
    return np.sum(np.abs(diff) ** 2, axis=(-2, -1))


_FUNCS = {
    DistanceKind.TRACE: trace_distance,
    DistanceKind.BURES2: bures2,
    DistanceKind.HELLINGER2: hellinger2,
    DistanceKind.RELENT: relative_entropy,
    DistanceKind.HS2: hilbert_schmidt2,
}


def distance(kind, rho, sigma):
    """Evaluate the distance functional ``kind`` between ``rho`` and ``sigma``.

    For relative entropy ``rho`` is the state being measured and ``sigma`` the
    reference, i.e. ``D(rho, chi)`` with ``chi`` a candidate classical state.
    Returns a float for single matrices and an array for stacks.
    """
    kind = kind if isinstance(kind, DistanceKind) else DistanceKind.parse(kind)
    val = _FUNCS[kind](rho, sigma)
    return float(val) if np.ndim(val) == 0 else val


def distance_spectra(kind, p, q):
    """Distance between two commuting states given their joint-eigenbasis spectra.

    ``p`` and ``q`` are probability vectors over the same orthonormal basis
    (broadcasting over leading axes). Used for Bell-diagonal pairs.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    if kind is DistanceKind.TRACE:
        return 0.5 * np.sum(np.abs(p - q), axis=-1)
    if kind in (DistanceKind.BURES2, DistanceKind.HELLINGER2):
        return np.maximum(2.0 * (1.0 - np.sum(np.sqrt(p * q), axis=-1)), 0.0)
    if kind is DistanceKind.HS2:
        return np.sum((p - q) ** 2, axis=-1)
    if kind is DistanceKind.RELENT:
        bad = np.any((q < SUPPORT_TOL) & (p > SUPPORT_TOL), axis=-1)
        safe_q = np.where(q < SUPPORT_TOL, 1.0, q)
        val = np.sum(_xlogy(p, p), axis=-1) - np.sum(_xlogy(p, safe_q), axis=-1)
        return np.where(bad, np.inf, np.maximum(val, 0.0))
    raise ValueError(f"unknown kind {kind}")


def distance_spectra_scalar(kind, p, q):
    """Pure-Python :func:`distance_spectra` for one pair of short spectra."""
    if kind is DistanceKind.TRACE:
        return 0.5 * sum(abs(a - b) for a, b in zip(p, q))
    if kind is DistanceKind.HS2:
        return sum((a - b) ** 2 for a, b in zip(p, q))
    if kind in (DistanceKind.BURES2, DistanceKind.HELLINGER2):
        aff = sum(math.sqrt(a * b) for a, b in zip(p, q) if a > 0 and b > 0)
        return max(2.0 * (1.0 - aff), 0.0)
    if kind is DistanceKind.RELENT:
        val = 0.0
        for a, b in zip(p, q):
            if a <= 0:
                continue
            if b < SUPPORT_TOL:
                if a > SUPPORT_TOL:
                    return math.inf
                continue
            val += a * (math.log(a) - math.log(b))
        return max(val, 0.0)
    raise ValueError(f"unknown kind {kind}")


# ---------------------------------------------------------------------------
# axiom probes


class Axiom(enum.Enum):
    CONTRACTIVITY = "Contractivity"
    TRANSPOSITION = "TranspositionInvariance"
    JOINT_CONVEXITY = "JointConvexity"


@dataclass
class AxiomProbeReport:
    axiom: Axiom
    kind: DistanceKind
    samples: int
    max_violation: float
    witness: Optional[dict] = field(default=None)

    @property
    def passed(self):
        return self.max_violation <= VIOLATION_TOL

    def to_dict(self):
        out = {
            "axiom": self.axiom.value,
            "kind": self.kind.value,
            "samples": self.samples,
            "max_violation": self.max_violation,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _mat_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def hs_counterexample():
    """Deterministic contractivity counterexample for the Hilbert-Schmidt distance.

    Two states differing only in the A marginal, sent through
    ``X -> Tr_B[X] (x) |0><0|``. Returns the states, the channel and the
    squared HS distance before and after.
    """
    from qfreeze.channels import apply_kraus, trace_b_replace_channel
    from qfreeze.linalg import I2, SZ, tensor2

    zi = tensor2(SZ, I2)
    rho = (np.eye(4) + 0.5 * zi) / 4
    sigma = (np.eye(4) - 0.5 * zi) / 4
    ch = trace_b_replace_channel()
    before = hilbert_schmidt2(rho, sigma)
    after = hilbert_schmidt2(apply_kraus(ch, rho), apply_kraus(ch, sigma))
    return {"rho": rho, "sigma": sigma, "channel": ch, "before": float(before), "after": float(after)}


def _sample_rng(seed, index):
    return np.random.default_rng([seed, index])


def probe_axiom(kind, axiom, samples, seed):
    """Largest signed violation of ``axiom`` over ``samples`` seeded draws.

    Sample ``i`` draws everything from a generator seeded by ``(seed, i)``.
    For contractivity, the Hilbert-Schmidt counterexample pair is always
    evaluated as an extra deterministic sample. States for relative entropy
    references are drawn with full rank so every evaluation is finite.
    """
    from qfreeze.channels import apply_kraus, random_cptp

    kind = kind if isinstance(kind, DistanceKind) else DistanceKind.parse(kind)
    axiom = axiom if isinstance(axiom, Axiom) else Axiom(axiom)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    worst = -np.inf
    witness = None

    def record(v, data):
        nonlocal worst, witness
        if v > worst:
            worst = v
            witness = data

    if axiom is Axiom.CONTRACTIVITY:
        ce = hs_counterexample()
        d0 = distance(kind, ce["rho"], ce["sigma"])
        d1 = distance(kind, apply_kraus(ce["channel"], ce["rho"]), apply_kraus(ce["channel"], ce["sigma"]))
        record(d1 - d0, {"sample": "trace_b_replace", "before": d0, "after": d1,
                         "rho": _mat_json(ce["rho"]), "sigma": _mat_json(ce["sigma"]),
                         "channel": ce["channel"].label})

    for i in range(samples):
        rng = _sample_rng(seed, i)
        rank_a = int(rng.integers(1, 5))
        rank_b = 4 if kind is DistanceKind.RELENT else int(rng.integers(1, 5))
        rho = random_density(rng, rank_a)
        sigma = random_density(rng, rank_b)
        if axiom is Axiom.CONTRACTIVITY:
            ch = random_cptp(rng, int(rng.integers(1, 5)))
            d0 = distance(kind, rho, sigma)
            d1 = distance(kind, apply_kraus(ch, rho), apply_kraus(ch, sigma))
            v = d1 - d0 if np.isfinite(d0) else -np.inf
            record(v, {"sample": i, "before": d0, "after": d1,
                       "rho": _mat_json(rho), "sigma": _mat_json(sigma), "channel": ch.to_dict()})
        elif axiom is Axiom.TRANSPOSITION:
            d0 = distance(kind, rho, sigma)
            d1 = distance(kind, rho.T, sigma.T)
            v = abs(d1 - d0) if np.isfinite(d0) else -np.inf
            record(v, {"sample": i, "plain": d0, "transposed": d1,
                       "rho": _mat_json(rho), "sigma": _mat_json(sigma)})
        else:
            tau = random_density(rng, int(rng.integers(1, 5)) if kind.is_symmetric else 4)
            vsig = random_density(rng, int(rng.integers(1, 5)) if kind.is_symmetric else 4)
            q = float(rng.uniform())
            lhs = distance(kind, q * rho + (1 - q) * sigma, q * tau + (1 - q) * vsig)
            rhs = q * distance(kind, rho, tau) + (1 - q) * distance(kind, sigma, vsig)
            v = lhs - rhs if np.isfinite(rhs) else -np.inf
            record(v, {"sample": i, "q": q, "lhs": lhs, "rhs": rhs})

    worst = float(worst)
    return AxiomProbeReport(
        axiom=axiom,
        kind=kind,
        samples=samples,
        max_violation=worst,
        witness=witness if worst > VIOLATION_TOL else None,
    )
