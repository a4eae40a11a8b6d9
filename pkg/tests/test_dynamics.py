import random
from fractions import Fraction

import pytest

from gausscalc.arith import ParamSpec, find_params
from gausscalc.coeffring import GaussCoeff, to_fp
from gausscalc.dynamics import (
    fourier_operator,
    free_propagator,
    free_propagator_brute,
    momentum_state,
    position_operator_u,
    quadratic_phase_operator,
    shift_operator_v,
    sm_transfer,
    weyl_pair,
)
from gausscalc.gauss import PreconditionViolation
from gausscalc.hilbert import (
    DenseState,
    PositionState,
    QuadForm,
    apply_dense,
    apply_operator,
    check_unitary,
    compose,
    domain_u,
    domain_v,
    inner,
    norm_squared,
)


@pytest.fixture(scope="module")
def params():
    return find_params(ParamSpec())


@pytest.fixture(scope="module")
def V(params):
    return domain_v(params)


def test_momentum_zero_is_uniform(params, V):
    v0 = momentum_state(params, 0)
    for r in (-3, 0, 17):
        assert to_fp(params, v0.coordinate(r)) == to_fp(
            params, GaussCoeff.rational(Fraction(1, params.m))
        )


def test_momentum_orthonormal(params, V):
    v1 = momentum_state(params, 3)
    v2 = momentum_state(params, 5)
    assert inner(params, v1, v2, "Hermitian").is_zero()
    assert norm_squared(params, v1) == GaussCoeff.one()
    # strict mode reproduces the declared-zero convention
    assert inner(params, v1, v1, "Hermitian", mode="strict").is_zero()


def test_fourier_maps_position_to_momentum(params, V):
    F = fourier_operator(params)
    out = apply_operator(params, F, PositionState(4, V))
    vm = momentum_state(params, 4)
    for r in (-9, 0, 4, 31):
        assert to_fp(params, out.coordinate(r)) == to_fp(params, vm.coordinate(r))


def test_position_expands_in_momentum_basis(params, V):
    # u[r] = (1/sqrt(N)) sum_p e(rp/N) v[p], checked pointwise at r0
    p = params.p
    r0, s0 = 7, -5
    total = 0
    inv_m = pow(params.m, -1, p)
    for q in V.index_range():
        vp = momentum_state(params, q)
        total = (
            total + params.char_e(Fraction(r0 * q, V.N) % 1) * to_fp(params, vp.coordinate(s0))
        ) % p
    expect = 1 if s0 == r0 else 0
    assert total * inv_m % p == expect


def test_weyl_actions(params, V):
    U = position_operator_u(params)
    Vo = shift_operator_v(params)
    u0 = PositionState(0, V)
    out = apply_operator(params, U, u0)
    assert to_fp(params, out.coordinate(0)) == 1  # eigenvalue e(0) = 1
    ur = PositionState(5, V)
    shifted = apply_operator(params, Vo, ur)
    assert to_fp(params, shifted.coordinate(6)) == 1
    assert to_fp(params, shifted.coordinate(5)) == 0
    # wraparound at the edge
    edge = apply_operator(params, Vo, PositionState(V.N // 2 - 1, V))
    assert to_fp(params, edge.coordinate(-V.N // 2)) == 1


def test_weyl_commutation_exact(params, V):
    pair = weyl_pair(params)
    for r in (-V.N // 2, -17, 0, 1, 40, V.N // 2 - 1):
        assert pair.commutation_defect(params, r) == {}


def test_weyl_commutation_as_operators(params, V):
    pair = weyl_pair(params)
    uv = compose(params, pair.U, pair.V)
    vu = compose(params, pair.V, pair.U)
    qfp = to_fp(params, pair.q)
    p = params.p
    for q, r in [(0, 1), (5, 6), (-3, -2), (70, 71)]:
        assert to_fp(params, uv.kernel_value(q, r)) == qfp * to_fp(params, vu.kernel_value(q, r)) % p


def test_commutation_phase_order(params, V):
    # q^N = 1 exactly
    q = weyl_pair(params).q
    assert to_fp(params, q ** V.N) == 1
    assert pow(to_fp(params, q), V.N, params.p) == 1


@pytest.mark.parametrize("t", [1, 2, 3, 6])
def test_free_propagator_vs_brute(params, V, t):
    op = free_propagator(params, t)
    p = params.p
    rng = random.Random(t)
    for _ in range(12):
        r, s = rng.choice(list(V.index_range())), rng.choice(list(V.index_range()))
        want = free_propagator_brute(params, t, V, r, s)
        assert to_fp(params, op.kernel_value(r, s)) == want, (t, r, s)
    # support: entries vanish exactly off t | r - s
    assert op.kernel_value(0, 1).is_zero() if t > 1 else True


def test_free_propagator_bad_time(params):
    with pytest.raises(PreconditionViolation):
        free_propagator(params, 5)  # 20 does not divide 144
    with pytest.raises(PreconditionViolation):
        free_propagator(params, 0)


def test_free_propagator_on_position_state(params, V):
    # t=2 applied to u[0]: support coset (2, 0)
    op = free_propagator(params, 2)
    out = apply_operator(params, op, PositionState(0, V))
    assert out.support == (2, 0)
    assert not to_fp(params, out.coordinate(1))
    assert to_fp(params, out.coordinate(2))


def test_free_propagator_additive(params, V):
    # free(t1) . free(t2) = free(t1 + t2), exact kernels
    p = params.p
    for t1, t2 in [(1, 1), (1, 2), (2, 1), (3, 3), (2, 2)]:
        prod = compose(params, free_propagator(params, t1), free_propagator(params, t2))
        target = free_propagator(params, t1 + t2)
        for q, r in [(0, 0), (0, t1 + t2), (5, 5 - (t1 + t2)), (1, 2), (7, -1)]:
            assert to_fp(params, prod.kernel_value(q, r)) == to_fp(
                params, target.kernel_value(q, r)
            ), (t1, t2, q, r)


def test_free_propagator_unitary(params, V):
    for t in (1, 2):
        report = check_unitary(params, free_propagator(params, t))
        assert report.ok, (t, report)


def test_fourier_unitary_and_squared(params, V):
    F = fourier_operator(params)
    assert check_unitary(params, F).ok
    FF = compose(params, F, F)
    # parity kernel: u[q] -> u[-q]
    dense = apply_dense(params, FF, DenseState.from_state(params, PositionState(9, V)))
    for r in V.index_range():
        assert dense.coords[r] == (1 if r == -9 else 0)


def test_quadratic_phase_diagonal(params, V):
    op = quadratic_phase_operator(params, 3)
    out = apply_operator(params, op, PositionState(5, V))
    assert to_fp(params, out.coordinate(5)) == params.char_e(Fraction(3 * 25, 2 * V.N) % 1)


def test_sm_transfer_symmetric_kernel(params):
    U = domain_u(params)
    T = sm_transfer(params, QuadForm(-1, 1, -1))
    rng = random.Random(11)
    for _ in range(8):
        q, r = rng.randint(-100, 100), rng.randint(-100, 100)
        assert to_fp(params, T.kernel_value(q, r)) == to_fp(params, T.kernel_value(r, q))


def test_sm_transfer_zero_form_uniform(params):
    T = sm_transfer(params, QuadForm(0, 0, 0))
    vals = {to_fp(params, T.kernel_value(q, r)) for q, r in [(0, 0), (3, -7), (100, 2)]}
    assert len(vals) == 1


def test_sm_transfer_compose_vs_brute(params):
    # T . T sampled against the literal intermediate sum on the U domain
    U = domain_u(params)
    T = sm_transfer(params, QuadForm(-1, 1, -1))
    TT = compose(params, T, T)
    p = params.p
    for q, r in [(0, 0), (1, 2), (-5, 17)]:
        acc = 0
        for mm in U.index_range():
            a = T.kernel_value(q, mm)
            b = T.kernel_value(mm, r)
            acc = (acc + to_fp(params, a) * to_fp(params, b)) % p
        assert to_fp(params, TT.kernel_value(q, r)) == acc, (q, r)


def test_sm_transfer_rejects_bad_form(params):
    from gausscalc.hilbert import InadmissibleForm

    with pytest.raises(InadmissibleForm):
        sm_transfer(params, QuadForm(1, 0, 0))
