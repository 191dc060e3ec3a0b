"""Trajectories on the freezing surface, threshold times and theorem checks."""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qfreeze.channels import DecoherenceParams, evolve_triple
from qfreeze.distances import BONA_FIDE, DistanceKind, distance
from qfreeze.errors import DegenerateInput, InvalidParam
from qfreeze.geometry import (
    OracleBudget,
    closest_classical_axis,
    concurrence_bd,
    discord_oracle,
    entanglement_bures_bd,
)
from qfreeze.states import BDTriple, bd_to_density

SURFACE_TOL = 1e-12
CLASSICAL_TOL = 1e-10
PLATEAU_TOL = 1e-6
LEMMA_TOL = 1e-10
ORACLE_TOL = 1e-3
PIN_TOL = 1e-6

# For noise axis k: (axis whose coefficient freezes the discord, dependent axis).
# k = 3 is the phase-flip surface {c1, -c1 c3, c3}; the others are its cyclic relabellings.
SURFACE_ROLES = {3: (1, 2), 1: (2, 3), 2: (3, 1)}


def surface_point(k, a, b):
    """Surface triple for noise axis ``k``: ``a`` on the freezing axis, ``b`` on axis ``k``."""
    f, d = SURFACE_ROLES[k]
    c = [0.0, 0.0, 0.0]
    c[f - 1] = float(a)
    c[k - 1] = float(b)
    c[d - 1] = -float(a) * float(b)
    return BDTriple(*c)


def freezing_surface_point(c1, c3):
    """``{c1, -c1 c3, c3}`` and whether the strict condition ``|c1| > |c3|`` holds."""
    if abs(c1) > 1 or abs(c3) > 1:
        raise InvalidParam(f"|c1|, |c3| must not exceed 1, got {c1}, {c3}")
    return surface_point(3, c1, c3), abs(c1) > abs(c3)


def on_surface(c, k=3, tol=SURFACE_TOL):
    f, d = SURFACE_ROLES[k]
    return abs(c[d - 1] + c[f - 1] * c[k - 1]) <= tol


def threshold_time(c1, c3, gamma):
    """``t* = -ln(|c3| / |c1|) / (2 gamma)``."""
    if c1 == 0 or c3 == 0:
        raise DegenerateInput("threshold time is undefined when c1 or c3 vanishes")
    if gamma <= 0:
        raise InvalidParam(f"gamma must be positive, got {gamma}")
    return -math.log(abs(c3) / abs(c1)) / (2 * gamma)


class RateTable:
    """Decay exponent ``Gamma(t)`` from a two-column table, linearly interpolated.

    Replaces ``2 gamma t`` so that off-axis correlations scale by ``exp(-Gamma(t))``.
    ``Gamma`` may decrease (information backflow) but must stay nonnegative.
    """

    def __init__(self, t, gamma_values):
        t = np.asarray(t, dtype=float)
        g = np.asarray(gamma_values, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or len(t) < 2:
            raise InvalidParam("rate table needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(t) <= 0):
            raise InvalidParam("rate table times must be strictly increasing")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise InvalidParam("rate table Gamma must be finite and nonnegative")
        self.t = t
        self.g = g

    @classmethod
    def from_csv(cls, path):
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise InvalidParam(f"malformed rate table row {row!r}") from None
                    continue  # header line
        if not rows:
            raise InvalidParam(f"no numeric rows in rate table {path}")
        t, g = zip(*rows)
        return cls(t, g)

    def __call__(self, t):
        return np.interp(t, self.t, self.g)

    def inverse(self, value):
        """Earliest time at which Gamma reaches ``value``, or None if never."""
        if self.g[0] >= value:
            return float(self.t[0])
        for i in range(1, len(self.g)):
            if self.g[i] >= value:
                g0, g1 = self.g[i - 1], self.g[i]
                t0, t1 = self.t[i - 1], self.t[i]
                return float(t0 + (value - g0) * (t1 - t0) / (g1 - g0))
        return None


@dataclass
class Trajectory:
    gamma: float
    k: int
    times: np.ndarray
    triples: list
    q_values: dict
    e_bures: np.ndarray
    concurrence: np.ndarray
    t_star: Optional[float] = None
    regimes: list = field(default_factory=list)


def _t_star_for(c0, gamma, k, rate):
    if not on_surface(c0, k):
        return None
    f, _ = SURFACE_ROLES[k]
    a, b = c0[f - 1], c0[k - 1]
    if a == 0 or b == 0 or abs(a) <= abs(b):
        return None
    if rate is not None:
        return rate.inverse(math.log(abs(a) / abs(b)))
    if gamma <= 0:
        return None
    return threshold_time(a, b, gamma)


def _regime(c, k, c0_on_surface):
    nonzero = sum(1 for x in c if abs(x) > SURFACE_TOL)
    if nonzero <= 1:
        return "classical"
    f, _ = SURFACE_ROLES[k]
    if c0_on_surface and abs(c[f - 1]) > abs(c[k - 1]):
        return "frozen"
    return "decaying"


def run_trajectory(c0, gamma=1.0, k=3, t_max=None, steps=201, kinds=tuple(DistanceKind),
                   rate=None, insert_t_star=True):
    """Evolve ``c0`` under local decoherence along axis ``k`` and measure it at each step.

    The grid is uniform on ``[0, t_max]`` (default ``5 / gamma``); the
    threshold time is inserted as an extra grid point when it falls inside.
    ``rate`` (a :class:`RateTable`) replaces ``2 gamma t`` by ``Gamma(t)``.
    """
    c0 = BDTriple(*c0).check()
    if steps < 2:
        raise InvalidParam("steps must be >= 2")
    if rate is None and gamma <= 0:
        raise InvalidParam("gamma must be positive")
    if t_max is None:
        t_max = 5.0 / gamma if rate is None else float(rate.t[-1])
    kinds = [DistanceKind.parse(x) if isinstance(x, str) else x for x in kinds]
    times = np.linspace(0.0, t_max, steps)
    t_star = _t_star_for(c0, gamma, k, rate)
    if insert_t_star and t_star is not None and 0 < t_star < t_max:
        if not np.any(np.isclose(times, t_star, rtol=0, atol=1e-12)):
            times = np.sort(np.append(times, t_star))

    triples = []
    for t in times:
        if rate is None:
            params = DecoherenceParams.from_rate(k, gamma, float(t))
        else:
            params = DecoherenceParams.from_decay(k, float(rate(t)))
        triples.append(evolve_triple(c0, params))

    q_values = {
        kind: np.array([closest_classical_axis(c, kind).value for c in triples]) for kind in kinds
    }
    conc = np.array([concurrence_bd(c) for c in triples])
    e_bures = np.array([entanglement_bures_bd(c) for c in triples])
    surf = on_surface(c0, k)
    regimes = [_regime(c, k, surf) for c in triples]
    return Trajectory(gamma, k, times, triples, q_values, e_bures, conc, t_star, regimes)


@dataclass
class FreezingReport:
    plateau_value: float
    plateau_end: float
    t_star_analytic: Optional[float]
    sudden_change_detected: bool
    max_plateau_deviation: float
    plateau_steps: int = 0
    classical: bool = False
    plateaus: list = field(default_factory=list)

    def to_dict(self):
        return {
            "plateau_value": self.plateau_value,
            "plateau_end": self.plateau_end,
            "t_star_analytic": self.t_star_analytic,
            "sudden_change_detected": self.sudden_change_detected,
            "max_plateau_deviation": self.max_plateau_deviation,
            "plateau_steps": self.plateau_steps,
            "classical": self.classical,
            "plateaus": self.plateaus,
        }


def _constant_runs(times, q, tol):
    """Every maximal run of >= 2 grid points with values within ``tol`` of the run start."""
    runs = []
    i = 0
    n = len(q)
    while i < n - 1:
        j = i
        while j + 1 < n and abs(q[j + 1] - q[i]) <= tol:
            j += 1
        if j > i:
            runs.append({"start": float(times[i]), "end": float(times[j]), "value": float(q[i])})
            i = j + 1
        else:
            i += 1
    return runs


def detect_freezing(traj, kind, tol=PLATEAU_TOL):
    """Find the initial plateau of ``Q(t)`` and whether a strict decay follows it."""
    q = np.asarray(traj.q_values[kind])
    times = traj.times
    dev = np.abs(q - q[0])
    n = 1
    while n < len(q) and dev[n] <= tol:
        n += 1
    tail = q[n - 1:]
    decreasing = len(tail) >= 2 and bool(np.all(np.diff(tail) < 0))
    classical = bool(np.all(np.abs(q) <= CLASSICAL_TOL))
    return FreezingReport(
        plateau_value=float(q[0]),
        plateau_end=float(times[n - 1]),
        t_star_analytic=traj.t_star,
        sudden_change_detected=bool(n >= 2 and n < len(q) and decreasing and not classical),
        max_plateau_deviation=float(dev[:n].max()),
        plateau_steps=n,
        classical=classical,
        plateaus=_constant_runs(times, q, tol),
    )


TRAJECTORY_COLUMNS = ["t", "c1", "c2", "c3", "Q_trace", "Q_bures2", "Q_hellinger2", "Q_relent",
                      "Q_hs2", "E_bures2", "regime"]


def _fmt(x):
    return f"{x:.12g}"


def trajectory_rows(traj):
    """Rows for the trajectory CSV; columns of kinds that were not computed are empty."""
    rows = []
    for i, t in enumerate(traj.times):
        c = traj.triples[i]
        row = [_fmt(t), _fmt(c[0]), _fmt(c[1]), _fmt(c[2])]
        for kind in (DistanceKind.TRACE, DistanceKind.BURES2, DistanceKind.HELLINGER2,
                     DistanceKind.RELENT, DistanceKind.HS2):
            row.append(_fmt(traj.q_values[kind][i]) if kind in traj.q_values else "")
        row.append(_fmt(traj.e_bures[i]))
        row.append(traj.regimes[i])
        rows.append(row)
    return rows


def trajectory_csv(traj):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    writer.writerows(trajectory_rows(traj))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# theorem verification


def surface_grid(n, lim=0.95):
    return np.linspace(-lim, lim, n)


def _d(kind, a, b):
    return distance(kind, bd_to_density(a), bd_to_density(b))


def verify_theorem1(kind, grid_n=11):
    """Both translational-invariance identities on a ``grid_n`` x ``grid_n`` surface grid.

    Identity 1: D({c1,-c1c3,c3}, {c1,0,0}) = D({0,0,c3}, I/4).
    Identity 2: D({c1,-c1c3,c3}, {0,0,c3}) = D({c1,0,0}, I/4).
    Evaluated with full density matrices.
    """
    kind = DistanceKind.parse(kind) if isinstance(kind, str) else kind
    if grid_n < 2:
        raise InvalidParam("grid_n must be >= 2")
    zero = BDTriple(0, 0, 0)
    worst1 = worst2 = 0.0
    arg1 = arg2 = None
    for c1 in surface_grid(grid_n):
        for c3 in surface_grid(grid_n):
            rho, _ = freezing_surface_point(c1, c3)
            d1 = abs(_d(kind, rho, (c1, 0, 0)) - _d(kind, (0, 0, c3), zero))
            d2 = abs(_d(kind, rho, (0, 0, c3)) - _d(kind, (c1, 0, 0), zero))
            if d1 > worst1:
                worst1, arg1 = d1, (float(c1), float(c3))
            if d2 > worst2:
                worst2, arg2 = d2, (float(c1), float(c3))
    return {
        "kind": kind.value,
        "grid_n": grid_n,
        "max_dev_identity1": worst1,
        "argmax_identity1": arg1,
        "max_dev_identity2": worst2,
        "argmax_identity2": arg2,
    }


def _margin(vals, ref):
    # smallest D(candidate) - D(reference); >= -tol means the reference is no farther
    m = min(v - ref for v in vals)
    return float(m) if np.isfinite(m) else math.inf


def verify_closest_classical(kind, grid_n=5, budget=None, seed=0, run_oracle=True):
    """Closest-classical-state checks on the surface grid, with worst-case margins.

    Covers the pinning of the axis minimizer, within-axis optimality of the
    projections onto the c1 and c3 axes, exclusion of the c2 axis,
    equidistance for |c1| = |c3| and monotone contraction along the axes,
    plus (optionally) agreement with the brute-force CC oracle.
    Hilbert-Schmidt results are reported but never fail the suite.
    """
    kind = DistanceKind.parse(kind) if isinstance(kind, str) else kind
    budget = budget or OracleBudget()
    grid = surface_grid(grid_n)
    zero = BDTriple(0, 0, 0)
    line = np.linspace(-1.0, 1.0, 21)
    pin_worst = 0.0
    pin_axis_ok = True
    l1 = l2 = math.inf
    oracle_gaps = []
    for c1 in grid:
        for c3 in grid:
            c, _ = freezing_surface_point(c1, c3)
            rho = bd_to_density(c)
            res = closest_classical_axis(c, kind)
            if abs(abs(c1) - abs(c3)) > 1e-12:
                k_pred, s_pred = (1, c1) if abs(c1) > abs(c3) else (3, c3)
                pin_axis_ok = pin_axis_ok and res.k == k_pred
                pin_worst = max(pin_worst, abs(res.s - s_pred) if res.k == k_pred else math.inf)

            d_x = distance(kind, rho, bd_to_density((c1, 0, 0)))
            d_z = distance(kind, rho, bd_to_density((0, 0, c3)))
            on_x = [distance(kind, rho, bd_to_density((s, 0, 0))) for s in line]
            on_z = [distance(kind, rho, bd_to_density((0, 0, s))) for s in line]
            on_y = [distance(kind, rho, bd_to_density((0, s, 0))) for s in line]
            l1 = min(l1, _margin(on_x, d_x), _margin(on_z, d_z))
            l2 = min(l2, _margin(on_y, d_x), _margin(on_y, d_z))

            if run_oracle:
                cell_seed = seed * 1_000_003 + len(oracle_gaps)
                ora = discord_oracle(rho, kind, "CC", budget, cell_seed)
                oracle_gaps.append(ora - res.value)

    l3 = 0.0
    for h in np.abs(grid):
        for sign in (1, -1):
            dev = abs(_d(kind, (h, 0, 0), zero) - _d(kind, (0, 0, sign * h), zero))
            l3 = max(l3, dev)

    l4 = math.inf
    qs = np.linspace(0.0, 1.0, 11)
    for c in grid:
        for axis in (1, 3):
            vals = [_d(kind, BDTriple.axis(axis, q * c), zero) for q in qs]
            l4 = min(l4, float(np.min(np.diff(vals))))

    checks = {
        "pinning_axis": {"passed": bool(pin_axis_ok)},
        "pinning": {"max_abs_s_error": pin_worst, "passed": bool(pin_axis_ok and pin_worst <= PIN_TOL)},
        "within_axis": {"margin": l1, "passed": bool(l1 >= -LEMMA_TOL)},
        "axis2_exclusion": {"margin": l2, "passed": bool(l2 >= -LEMMA_TOL)},
        "equidistance": {"max_dev": l3, "passed": bool(l3 <= LEMMA_TOL)},
        "monotonicity": {"margin": l4, "passed": bool(l4 >= -LEMMA_TOL)},
    }
    if run_oracle:
        lo, hi = float(min(oracle_gaps)), float(max(oracle_gaps))
        checks["oracle_agreement"] = {"min_gap": lo, "max_gap": hi,
                                      "passed": bool(-ORACLE_TOL <= lo and hi <= ORACLE_TOL)}
    exempt = not kind.is_bona_fide
    return {
        "kind": kind.value,
        "grid_n": grid_n,
        "exempt": exempt,
        "checks": checks,
        "passed": True if exempt else bool(all(v["passed"] for v in checks.values())),
    }


def bona_fide_kinds():
    return BONA_FIDE
