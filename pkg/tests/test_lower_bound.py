import math

import numpy as np
import pytest

from onlinecode import lower_bound as lb


def test_instance_examples():
    inst = lb.build_instance(1.0, 1.0, 1, 1)
    assert inst.gamma[0] == 1.0 and inst.f[0, 0] == 1.0
    inst = lb.build_instance(1.0, 2.0, 3, 4)
    assert np.all(inst.f[inst.f != 0] == 1.0)
    inst = lb.build_instance(0.5, 1.0, 2, 3)
    assert inst.f[0, 1] == 1.0
    assert np.all(inst.f[0, 2:] == 0.0)
    assert np.all(np.diff(inst.f[2]) >= 0)
    with pytest.raises(ValueError):
        lb.build_instance(0.0, 1.0, 1, 1)


def test_dual_value_examples():
    inst = lb.build_instance(1.0, 1.0, 1, 1)
    a0 = 0.7
    assert lb.dual_value(inst, [a0]) == pytest.approx(a0 - a0 ** 2 / 4)
    assert lb.dual_value(lb.build_instance(0.5, 1.0, 2, 5), np.zeros(5)) == 0.0
    grid = np.linspace(0, 4, 4001)
    vals = [lb.dual_value(inst, [a]) for a in grid]
    assert grid[int(np.argmax(vals))] == pytest.approx(2.0) and max(vals) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lb.dual_value(inst, [-1.0])


def test_certificate_constants():
    c_prime, a0, _ = lb.certificate_constants(1.0, 1.0, 1)
    assert c_prime == 4.0 and a0 == 1 / 8


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("k", [1, 3, 8])
@pytest.mark.parametrize("T", [4, 16, 64, 256])
def test_certificate_properties(mu, k, T):
    inst = lb.build_instance(mu, 1.0, k, T)
    cert = lb.make_certificate(inst)
    assert cert.value > 0 and cert.tau > 0
    assert cert.value >= cert.tau * lb.harmonic(T)
    j = np.ceil(np.arange(1, k * T + 1) / k)
    assert np.all(cert.Lambda <= cert.a0 * cert.c_prime / np.sqrt(j) * (1 + 1e-12))
    primal = lb.primal_solve(inst)
    assert primal.objective >= cert.value - 1e-8
    assert primal.kkt_residual <= 1e-9


def test_base_case_strong_duality():
    inst = lb.build_instance(1.0, 1.0, 1, 1)
    sol = lb.primal_solve(inst)
    assert sol.objective == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(sol.z, [1.0], atol=1e-12)


def test_scaling_in_c0():
    a = lb.primal_solve(lb.build_instance(0.5, 1.0, 2, 8)).objective
    b = lb.primal_solve(lb.build_instance(0.5, 2.0, 2, 8)).objective
    assert b == pytest.approx(4 * a, rel=1e-10)


def test_against_projected_gradient(rng):
    for _ in range(5):
        inst = lb.build_instance(float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.5, 2)),
                                 int(rng.integers(1, 4)), int(rng.integers(2, 9)))
        exact = lb.primal_solve(inst).objective
        _, oracle = lb.projected_gradient_dual(inst)
        assert oracle == pytest.approx(exact, rel=1e-5)


def test_size_cap():
    with pytest.raises(ValueError):
        lb.primal_solve(lb.build_instance(0.5, 1.0, 16, 200))


def test_integral_bound():
    assert lb.integral_bound(1, 2, 1.0) == pytest.approx(math.log(2))
    assert lb.integral_bound(1, 4, 2.0) == pytest.approx(0.75)
    for a in (1, 2, 5):
        for b in (a + 1, a + 7, 40):
            for alpha in (0.3, 0.5, 1.0, 1.5, 2.0):
                s = sum(i ** -alpha for i in range(a + 1, b + 1))
                assert s <= lb.integral_bound(a, b, alpha) + 1e-15
    with pytest.raises(ValueError):
        lb.integral_bound(3, 3, 1.0)


def test_unit_pulse_chain(rng):
    inst = lb.build_instance(0.5, 1.0, 2, 8)
    sol = lb.primal_solve(inst)
    # the optimum itself, with arbitrary signs, is a feasible first column
    col = sol.z * rng.choice([-1.0, 1.0], size=sol.z.size)
    out = lb.unit_pulse_chain(inst, col, sol.objective)
    assert out["feasible"] and out["holds"]
    assert out["l2_squared"] == pytest.approx(sol.objective)
    for _ in range(20):
        v = rng.uniform(size=inst.n)
        v *= max(inst.gamma / (inst.f @ v))  # scale up to feasibility
        out = lb.unit_pulse_chain(inst, v, sol.objective)
        assert out["feasible"] and out["holds"] and out["l2_squared"] >= sol.objective
