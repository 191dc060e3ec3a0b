import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfreeze.channels import (
    NAMED_UNITARIES, DecoherenceParams, KrausChannel, apply_kraus, choi_matrix, evolve_triple,
    global_rephasing, identity_channel, local_decoherence, named_unitary_conjugation, random_cptp,
    trace_b_replace_channel, validate_cptp,
)
from qfreeze.errors import IncompleteKrausSet, InvalidAxis, InvalidParam, OutOfRangeQ, UnknownName
from qfreeze.linalg import I4, dagger
from qfreeze.states import bd_to_density, density_to_bloch, is_density

from strategies import bd_triples, densities, seeds, surface_points

r_values = st.floats(0.0, 1.0)
axes = st.sampled_from([1, 2, 3])


def _triple_of(rho):
    return np.diag(density_to_bloch(rho).T)


def _cptp_ok(ch):
    d = validate_cptp(ch)
    return d["completeness_residual"] <= 1e-12 and d["choi_min_eigenvalue"] >= -1e-10


@given(axes, r_values)
def test_local_decoherence_is_cptp(k, r):
    ch = local_decoherence(DecoherenceParams(k, r))
    assert len(ch.kraus_ops) == 4
    assert _cptp_ok(ch)


@given(bd_triples(), axes, r_values)
def test_local_decoherence_closed_form(c, k, r):
    p = DecoherenceParams(k, r)
    out = apply_kraus(local_decoherence(p), bd_to_density(c))
    assert np.allclose(_triple_of(out), evolve_triple(c, p), atol=1e-12)


def test_phase_flip_example():
    p = DecoherenceParams(3, np.sqrt(0.5))
    assert np.allclose(evolve_triple((1, -0.6, 0.6), p), (0.5, -0.3, 0.6))


def test_decoherence_params_validation():
    with pytest.raises(InvalidAxis):
        DecoherenceParams(4, 0.5)
    with pytest.raises(InvalidParam):
        DecoherenceParams(1, 1.5)
    with pytest.raises(InvalidParam):
        DecoherenceParams(1, 0.5, gamma=1.0, t=1.0)
    with pytest.raises(InvalidParam):
        DecoherenceParams.from_rate(1, -1.0, 1.0)
    p = DecoherenceParams.from_rate(3, 2.0, 0.25)
    assert p.r == pytest.approx(np.exp(-0.5))
    assert DecoherenceParams.from_decay(3, 1.0).r ** 2 == pytest.approx(np.exp(-1.0))
    assert DecoherenceParams.complete(2).r == 0.0


@given(st.floats(-1, 1))
def test_rephasing_cptp(q):
    ch = global_rephasing(q)
    assert len(ch.kraus_ops) == 8
    assert _cptp_ok(ch)


@pytest.mark.parametrize("q", [-1.5, 1.0000001])
def test_rephasing_out_of_range(q):
    with pytest.raises(OutOfRangeQ):
        global_rephasing(q)


@given(densities(), st.floats(-1, 1))
def test_rephasing_lands_on_surface(rho, q):
    out = apply_kraus(global_rephasing(q), rho)
    t33 = density_to_bloch(rho).T[2, 2]
    b = density_to_bloch(out)
    assert np.allclose(b.x, 0, atol=1e-12) and np.allclose(b.y, 0, atol=1e-12)
    assert np.allclose(b.T, np.diag([q, -q * t33, t33]), atol=1e-12)


def test_rephasing_example():
    out = apply_kraus(global_rephasing(0.8), bd_to_density((0, 0, 0.6)))
    assert np.allclose(_triple_of(out), (0.8, -0.48, 0.6))


@given(surface_points())
def test_rephasing_inverts_complete_dephasing(pt):
    c1, c3 = pt
    rho = bd_to_density((c1, -c1 * c3, c3))
    dephased = apply_kraus(local_decoherence(DecoherenceParams.complete(3)), rho)
    restored = apply_kraus(global_rephasing(c1), dephased)
    assert np.max(np.abs(restored - rho)) <= 1e-12


def test_named_unitaries():
    for u in NAMED_UNITARIES.values():
        assert np.allclose(dagger(u) @ u, I4)
    out = named_unitary_conjugation("U", bd_to_density((1, -0.6, 0.6)))
    assert np.allclose(_triple_of(out), (0.6, -0.6, 1))
    out = named_unitary_conjugation("U-", bd_to_density((0, 0, 0.5)))
    assert np.allclose(_triple_of(out), (-0.5, 0, 0))
    with pytest.raises(UnknownName):
        named_unitary_conjugation("V", I4 / 4)


@given(bd_triples())
def test_pauli_products_preserve_bd(c):
    for name in ("Ux", "Uy", "Uz"):
        out = named_unitary_conjugation(name, bd_to_density(c))
        assert np.allclose(out, bd_to_density(c))


@given(seeds, st.integers(1, 4))
def test_random_cptp_is_cptp(seed, n):
    ch = random_cptp(seed, n)
    assert _cptp_ok(ch)
    assert is_density(apply_kraus(ch, I4 / 4))


def test_random_cptp_bad_count():
    with pytest.raises(InvalidParam):
        random_cptp(0, 0)


def test_incomplete_kraus_rejected():
    ch = KrausChannel((0.5 * I4,), "half")
    with pytest.raises(IncompleteKrausSet):
        apply_kraus(ch, I4 / 4)


def test_identity_choi_is_maximally_entangled():
    choi = choi_matrix(identity_channel())
    assert np.allclose(np.linalg.eigvalsh(choi), [0] * 15 + [4])


def test_trace_b_replace_is_cptp_and_nonunital():
    ch = trace_b_replace_channel()
    assert _cptp_ok(ch)
    assert not np.allclose(apply_kraus(ch, I4 / 4), I4 / 4)


def test_channel_json_roundtrip():
    ch = global_rephasing(0.3)
    back = KrausChannel.from_dict(json.loads(ch.to_json()))
    assert back.label == ch.label
    assert all(np.allclose(a, b) for a, b in zip(ch.kraus_ops, back.kraus_ops))


def test_batched_application():
    stack = np.stack([bd_to_density((0.1 * i, 0, 0.2)) for i in range(3)])
    ch = local_decoherence(DecoherenceParams(3, 0.5))
    out = apply_kraus(ch, stack)
    for rho, o in zip(stack, out):
        assert np.allclose(apply_kraus(ch, rho), o)
