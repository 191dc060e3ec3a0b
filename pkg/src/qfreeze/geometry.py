"""Distance from Bell-diagonal states to the classical and separable sets.

Two independent routes are provided for discord:

* :func:`closest_classical_axis` searches the three lines of classical BD
  states ``{s, 0, 0}``, ``{0, s, 0}``, ``{0, 0, s}``;
* :func:`discord_oracle` brute-forces over general CC or CQ states and
  polishes the best candidates with Nelder-Mead.

The axis search never assumes where on an axis the minimum sits.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from qfreeze.distances import DistanceKind, distance, distance_spectra, distance_spectra_scalar
from qfreeze.errors import BudgetTooSmall, InvalidParam
from qfreeze.linalg import I2, SX, SY, SZ, dagger
from qfreeze.states import BDTriple, bd_density_batch, bd_to_density, bell_eigenvalues

AXIS_GRID = 65
S_TOL = 1e-10
TIE_TOL = 1e-12
INV_PHI = (math.sqrt(5) - 1) / 2


def _kind(kind):
    return kind if isinstance(kind, DistanceKind) else DistanceKind.parse(kind)


@dataclass
class ClosestClassicalResult:
    k: int
    s: float
    value: float
    kind: DistanceKind
    ties: list = field(default_factory=list)

    @property
    def triple(self):
        return BDTriple.axis(self.k, self.s)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "k": self.k,
            "s": self.s,
            "value": self.value,
            "ties": [{"k": k, "s": s} for k, s in self.ties],
        }


def golden_section(f, a, b, tol=S_TOL, max_iter=200):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    x = c if fc <= fd else d
    return x, min(fc, fd)


def _bisect_edge(pred, inside, outside, tol):
    # pred(inside) is True, pred(outside) is False
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def _axis_profile(c, kind, k, method):
    """Distance from ``c`` to ``{s on axis k}``: a vectorized and a scalar version."""
    if method == "spectral":
        lam = bell_eigenvalues(*c)
        lam_list = [float(x) for x in lam]

        def f(s):
            s = np.asarray(s, dtype=float)
            cc = np.zeros(s.shape + (3,))
            cc[..., k - 1] = s
            mu = bell_eigenvalues(cc[..., 0], cc[..., 1], cc[..., 2])
            return distance_spectra(kind, lam, mu)

        # Bell eigenvalues of {s on axis k}: (1 + s)/4 on two states, (1 - s)/4 on the others
        plus = {1: (0, 2), 2: (1, 2), 3: (0, 1)}[k]

        def scalar(s):
            hi, lo = (1 + s) / 4, (1 - s) / 4
            mu = [hi if i in plus else lo for i in range(4)]
            return distance_spectra_scalar(kind, lam_list, mu)

    elif method == "matrix":
        rho = bd_to_density(c)

        def f(s):
            s = np.asarray(s, dtype=float)
            cc = np.zeros(s.shape + (3,))
            cc[..., k - 1] = s
            return np.asarray(distance(kind, rho, bd_density_batch(cc)))

        def scalar(s):
            return float(f(s))

    else:
        raise ValueError(f"unknown method {method!r}")
    return f, scalar


def _minimize_axis(c, kind, k, method):
    f, scalar = _axis_profile(c, kind, k, method)
    grid = np.linspace(-1.0, 1.0, AXIS_GRID)
    vals = f(grid)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, AXIS_GRID - 1)]
    s0, f0 = golden_section(scalar, lo, hi)
    if vals[i] < f0:
        s0, f0 = float(grid[i]), float(vals[i])
    if not np.isfinite(f0):
        return s0, f0
    # The profile is convex in s, so its near-minimal set is an interval.
    # Report the interval midpoint: a flat minimum (trace distance) then
    # resolves to a unique, reproducible point.
    eps = 1e-13 + 1e-12 * abs(f0)
    pred = lambda s: scalar(s) <= f0 + eps
    left = -1.0 if pred(-1.0) else _bisect_edge(pred, s0, -1.0, S_TOL)
    right = 1.0 if pred(1.0) else _bisect_edge(pred, s0, 1.0, S_TOL)
    s_mid = 0.5 * (left + right)
    f_mid = scalar(s_mid)
    if f_mid <= f0 + eps:
        s0, f0 = s_mid, f_mid
    return float(s0), float(f0)


def closest_classical_axis(c, kind, method="spectral"):
    """Nearest classical BD state ``{s on axis k}`` to the BD state ``c``.

    Each axis is scanned on a 65-point grid and refined by golden section to
    ``|ds| <= 1e-10``. The global minimum over the three axes wins; ties
    within 1e-12 go to the smaller ``k`` and are listed in ``ties``.
    ``method="matrix"`` evaluates full density-matrix distances instead of
    the Bell-spectrum shortcut (both states are diagonal in the Bell basis).
    """
    c = BDTriple(*c).check()
    kind = _kind(kind)
    per_axis = [(k,) + _minimize_axis(c, kind, k, method) for k in (1, 2, 3)]
    best = min(v for _, _, v in per_axis)
    winners = [(k, s) for k, s, v in per_axis if v <= best + TIE_TOL]
    k, s = winners[0]
    value = dict((kk, v) for kk, _, v in per_axis)[k]
    return ClosestClassicalResult(k=k, s=s, value=value, kind=kind, ties=winners[1:])


def discord_geometric(c, kind):
    """Geometric discord of a BD state from the axis search.

    For non-bona-fide kinds (Hilbert-Schmidt) this is only the minimum over
    classical BD states; use :func:`discord_geometric_report` for the flag.
    """
    return closest_classical_axis(c, kind).value


def discord_geometric_report(c, kind):
    kind = _kind(kind)
    res = closest_classical_axis(c, kind)
    return {"value": res.value, "axis_restricted": not kind.is_bona_fide, "closest": res.to_dict()}


# ---------------------------------------------------------------------------
# brute-force oracles


@dataclass(frozen=True)
class OracleBudget:
    basis_grid: int = 12
    prob_grid: int = 6
    refine_iters: int = 200

    def __post_init__(self):
        if min(self.basis_grid, self.prob_grid, self.refine_iters) < 1:
            raise InvalidParam("all budget entries must be >= 1")


def _direction(theta, phi):
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def _bloch_op(v):
    v = np.asarray(v)
    return v[..., 0, None, None] * SX + v[..., 1, None, None] * SY + v[..., 2, None, None] * SZ


def _projector_pair(e):
    op = _bloch_op(e)
    return 0.5 * (I2 + op), 0.5 * (I2 - op)


def _kron_batch(a, b):
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (4, 4))


def _stick_probs(alpha):
    """Map unconstrained angles ``(..., n-1)`` to a point on the n-simplex."""
    u = np.sin(alpha) ** 2
    n = u.shape[-1] + 1
    probs = np.empty(u.shape[:-1] + (n,))
    rest = np.ones(u.shape[:-1])
    for i in range(n - 1):
        probs[..., i] = rest * u[..., i]
        rest = rest * (1 - u[..., i])
    probs[..., -1] = rest
    return probs


def _stick_angles(probs):
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    probs = probs / probs.sum()
    alpha = []
    rest = 1.0
    for p in probs[:-1]:
        u = 0.0 if rest <= 1e-15 else min(max(p / rest, 0.0), 1.0)
        alpha.append(math.asin(math.sqrt(u)))
        rest -= p
    return np.array(alpha)


def _cc_states(x):
    """CC states from parameters ``(..., 7)``: two basis directions and three stick angles."""
    pa = _projector_pair(_direction(x[..., 0], x[..., 1]))
    pb = _projector_pair(_direction(x[..., 2], x[..., 3]))
    probs = _stick_probs(x[..., 4:7])
    chi = 0
    for i in range(2):
        for j in range(2):
            chi = chi + probs[..., 2 * i + j, None, None] * _kron_batch(pa[i], pb[j])
    return chi


def _bloch_ball(x):
    # (radius angle, theta, phi) -> vector in the unit ball
    return np.sin(x[..., 0:1]) ** 2 * _direction(x[..., 1], x[..., 2])


def _cq_states(x):
    """CQ states from parameters ``(..., 9)``: basis of A, weight, two B Bloch vectors."""
    p1, p2 = _projector_pair(_direction(x[..., 0], x[..., 1]))
    p = np.sin(x[..., 2]) ** 2
    r1 = 0.5 * (I2 + _bloch_op(_bloch_ball(x[..., 3:6])))
    r2 = 0.5 * (I2 + _bloch_op(_bloch_ball(x[..., 6:9])))
    return p[..., None, None] * _kron_batch(p1, r1) + (1 - p)[..., None, None] * _kron_batch(p2, r2)


def _basis_directions(n):
    # e and -e give the same basis, so a hemisphere is enough
    thetas = np.linspace(0.0, np.pi / 2, n)
    phis = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    seen = {}
    for t in thetas:
        for p in phis:
            e = _direction(t, p)
            key = tuple(np.round(e, 12) + 0.0)
            seen.setdefault(key, (t, p))
    return np.array(list(seen.values()))


def _vector_angles(v):
    """Inverse of :func:`_bloch_ball` for a vector of norm <= 1."""
    r = float(np.linalg.norm(v))
    if r < 1e-15:
        return np.array([0.0, 0.0, 0.0])
    t = math.acos(max(-1.0, min(1.0, v[2] / r)))
    p = math.atan2(v[1], v[0])
    return np.array([math.asin(math.sqrt(min(r, 1.0))), t, p])


def _nelder_mead(fun, x0, iters, rng, scale=0.15):
    n = len(x0)
    simplex = np.vstack([x0, x0 + scale * rng.standard_normal((n, n))])
    res = minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "maxiter": iters, "maxfev": 4 * iters * n,
                 "xatol": 1e-10, "fatol": 1e-13, "adaptive": n > 6},
    )
    return res.x, float(res.fun)


def _safe_scalar(kind, rho, build):
    def f(x):
        v = distance(kind, rho, build(np.asarray(x)))
        return v if np.isfinite(v) else 1e6

    return f


def discord_oracle(rho, kind, set="CC", budget=None, seed=0, n_refine=4, return_params=False):
    """Upper bound on the distance from ``rho`` to the CC or CQ set.

    Stage 1 evaluates every pair of grid bases with the probabilities (CC) or
    conditional states (CQ) obtained by measuring ``rho`` in that basis.
    Stage 2 (CC only) rescans the joint distribution on a ``prob_grid``
    lattice for the best bases. Stage 3 polishes the ``n_refine`` best
    candidates with a seeded Nelder-Mead simplex.
    """
    budget = budget or OracleBudget()
    if budget.basis_grid < 4:
        raise BudgetTooSmall(f"basis_grid must be >= 4, got {budget.basis_grid}")
    kind = _kind(kind)
    rho = np.asarray(rho, dtype=complex)
    rng = np.random.default_rng(seed)
    dirs = _basis_directions(budget.basis_grid)

    if set == "CC":
        cands = _cc_candidates(rho, kind, dirs, budget, n_refine)
        build = _cc_states
    elif set == "CQ":
        cands = _cq_candidates(rho, kind, dirs, n_refine)
        build = _cq_states
    else:
        raise ValueError(f"set must be 'CC' or 'CQ', got {set!r}")

    f = _safe_scalar(kind, rho, build)
    best_x, best_v = None, np.inf
    for x0, v0 in cands:
        if v0 < best_v:
            best_x, best_v = x0, v0
        x, v = _nelder_mead(f, x0, budget.refine_iters, rng)
        v = distance(kind, rho, build(x))
        if v < best_v:
            best_x, best_v = x, v
    best_v = float(best_v)
    return (best_v, best_x) if return_params else best_v


def _top(values, n):
    values = np.where(np.isfinite(values), values, np.inf)
    order = np.argsort(values, kind="stable")
    return order[:n]


def _cc_candidates(rho, kind, dirs, budget, n_refine):
    na = len(dirs)
    ia, ib = np.meshgrid(np.arange(na), np.arange(na), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    ea = _direction(dirs[ia, 0], dirs[ia, 1])
    eb = _direction(dirs[ib, 0], dirs[ib, 1])
    pa = _projector_pair(ea)
    pb = _projector_pair(eb)
    projs = [_kron_batch(pa[i], pb[j]) for i in range(2) for j in range(2)]
    probs = np.stack([np.real(np.einsum("nab,ba->n", p, rho)) for p in projs], axis=-1)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=-1, keepdims=True)
    chi = sum(probs[:, m, None, None] * projs[m] for m in range(4))
    vals = np.asarray(distance(kind, rho, chi))
    top = _top(vals, n_refine)

    # joint-distribution lattice for the best bases
    g = np.linspace(0.0, np.pi / 2, budget.prob_grid)
    lattice = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    out = []
    for idx in top:
        angles = np.concatenate([dirs[ia[idx]], dirs[ib[idx]]])
        x_dep = np.concatenate([angles, _stick_angles(probs[idx])])
        xs = np.concatenate([np.broadcast_to(angles, (len(lattice), 4)), lattice], axis=1)
        lv = np.asarray(distance(kind, rho, _cc_states(xs)))
        j = int(np.argmin(np.where(np.isfinite(lv), lv, np.inf)))
        if lv[j] < vals[idx]:
            out.append((xs[j], float(lv[j])))
        else:
            out.append((x_dep, float(vals[idx])))
    return out


def _cq_candidates(rho, kind, dirs, n_refine):
    e = _direction(dirs[:, 0], dirs[:, 1])
    p1, p2 = _projector_pair(e)
    cands = []
    chis = []
    for n in range(len(dirs)):
        blocks = []
        for proj in (p1[n], p2[n]):
            big = np.kron(proj, I2)
            blk = big @ rho @ big
            pb = np.trace(blk).real
            rb = np.trace(blk.reshape(2, 2, 2, 2), axis1=0, axis2=2)
            vec = np.zeros(3) if pb <= 1e-15 else np.array(
                [np.trace(rb @ s).real / pb for s in (SX, SY, SZ)])
            norm = np.linalg.norm(vec)
            if norm > 1:
                vec = vec / norm
            blocks.append((pb, vec))
        (pa, v1), (_, v2) = blocks
        pa = min(max(pa, 0.0), 1.0)
        x = np.concatenate([dirs[n], [math.asin(math.sqrt(pa))], _vector_angles(v1), _vector_angles(v2)])
        cands.append(x)
    xs = np.array(cands)
    chis = _cq_states(xs)
    vals = np.asarray(distance(kind, rho, chis))
    return [(xs[i], float(vals[i])) for i in _top(vals, n_refine)]


# ---------------------------------------------------------------------------
# entanglement of BD states


def concurrence_bd(c):
    lam = BDTriple(*c).check().bell_eigenvalues()
    return float(max(0.0, 2 * lam.max() - 1))


def concurrence_wootters(rho):
    """Wootters concurrence from the spin-flip construction."""
    rho = np.asarray(rho, dtype=complex)
    yy = np.kron(SY, SY)
    r = rho @ yy @ np.conj(rho) @ yy
    ev = np.sort(np.sqrt(np.clip(np.real(np.linalg.eigvals(r)), 0.0, None)))[::-1]
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def is_separable_bd(c, tol=1e-12):
    """Octahedron test ``|c1| + |c2| + |c3| <= 1``."""
    return bool(sum(abs(x) for x in c) <= 1 + tol)


def entanglement_bures_bd(c):
    """Squared-Bures entanglement ``2 (1 - sqrt(F_s))`` with ``F_s = (1 + sqrt(1 - C^2)) / 2``."""
    conc = concurrence_bd(c)
    fs = 0.5 * (1 + math.sqrt(max(0.0, 1 - conc * conc)))
    return float(max(0.0, 2 * (1 - math.sqrt(fs))))


N_PRODUCTS = 6


def _separable_states(x):
    """Mixtures of ``N_PRODUCTS`` product states, 6 angles per term plus stick weights."""
    terms = x[..., : 6 * N_PRODUCTS].reshape(x.shape[:-1] + (N_PRODUCTS, 6))
    w = _stick_probs(x[..., 6 * N_PRODUCTS:])
    ra = 0.5 * (I2 + _bloch_op(_bloch_ball(terms[..., 0:3])))
    rb = 0.5 * (I2 + _bloch_op(_bloch_ball(terms[..., 3:6])))
    return np.sum(w[..., None, None] * _kron_batch(ra, rb), axis=-3)


def separable_oracle(rho, kind=DistanceKind.BURES2, samples=200, seed=0, refine_iters=3000, n_refine=2):
    """Upper bound on the distance from ``rho`` to the separable set.

    Candidates are ``samples`` random mixtures of product states together with
    the classical states obtained by measuring ``rho`` in grid product bases;
    the best few are polished with Powell's direction-set method, which copes
    with the 41-dimensional parameter space far better than a simplex.
    """
    kind = _kind(kind)
    rho = np.asarray(rho, dtype=complex)
    rng = np.random.default_rng(seed)
    dim = 6 * N_PRODUCTS + N_PRODUCTS - 1
    xs = [rng.uniform(0, np.pi, (samples, dim))]

    # measured-in-product-basis seeds: four pure product terms, two idle terms
    dirs = _basis_directions(6)
    seeds = []
    for da in dirs:
        for db in dirs:
            ea, eb = _direction(*da), _direction(*db)
            terms, weights = [], []
            for sa in (1, -1):
                for sb in (1, -1):
                    pa = _projector_pair(sa * ea)[0]
                    pb = _projector_pair(sb * eb)[0]
                    weights.append(float(np.real(np.trace(np.kron(pa, pb) @ rho))))
                    terms.append(np.concatenate([_vector_angles(sa * ea), _vector_angles(sb * eb)]))
            terms += [np.zeros(6)] * (N_PRODUCTS - 4)
            weights += [0.0] * (N_PRODUCTS - 4)
            seeds.append(np.concatenate(terms + [_stick_angles(weights)]))
    seeds = np.array(seeds)
    f = _safe_scalar(kind, rho, _separable_states)
    best = np.inf
    # polish the best random mixtures and the best measured seeds separately;
    # the measured seeds tend to sit in the same local basin
    for pool in (xs[0], seeds):
        vals = np.asarray(distance(kind, rho, _separable_states(pool)))
        for i in _top(vals, n_refine):
            best = min(best, float(vals[i]))
            res = minimize(f, pool[i], method="Powell",
                           options={"maxiter": refine_iters, "xtol": 1e-10, "ftol": 1e-14})
            best = min(best, distance(kind, rho, _separable_states(res.x)))
    return float(best)
