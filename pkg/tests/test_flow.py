import math

import numpy as np
import pytest

from vdpconley.flow import (
    GapKind,
    GapSpec,
    OmegaKind,
    bisect_bifurcation,
    connection_gap,
    detect_brackets,
    detect_limit_cycle,
    find_limit_cycle,
    hopf_indicator,
    manifold_branch,
    omega_limit_estimate,
    return_map,
    theta_grid,
)
from vdpconley.integrate import integrate
from vdpconley.model import SystemParams

import oracles

# roots of the gap functional from the independent scipy oracle (tests/oracles.py,
# DOP853 rtol 1e-12 with event location, brentq xtol 1e-10), frozen here
ORACLE_ROOTS = {
    ("homoclinic", 0.5, 2.0): 0.03472571018914193,
    ("heteroclinic-upper", -1.0, 2.0): -0.11212482159892848,
    ("homoclinic", -1.0, 2.0): 0.15565944142953117,
    ("heteroclinic-lower", -1.0, 2.0): 1.165146535210689,
}
EXPECTED_BRACKETS = {
    ("homoclinic", 0.5, 2.0): (0.02, 0.04),
    ("heteroclinic-upper", -1.0, 2.0): (-0.2, -0.05),
    ("homoclinic", -1.0, 2.0): (0.1, 0.2),
    ("heteroclinic-lower", -1.0, 2.0): (1.1, 1.2),
}


def test_manifold_seed_geometry():
    p = SystemParams(0.5, 2.0, 0.03)
    br = manifold_branch(p, "E1", "unstable", "plus", 1e-6)
    assert math.hypot(br.seed.x + 0.5, br.seed.y) == pytest.approx(1e-6, rel=1e-12)
    assert br.seed.x > -0.5 and br.branch_id == "E1-unstable-plus"


def test_manifold_branch_rejects_bad_input():
    p = SystemParams(0.5, 2.0, 0.03)
    with pytest.raises(ValueError, match="seed_offset"):
        manifold_branch(p, "E1", "unstable", 1, 1e-2)
    with pytest.raises(ValueError, match="not a saddle"):
        manifold_branch(p, "E2", "unstable", 1)
    with pytest.raises(ValueError, match="side"):
        manifold_branch(p, "E1", "unstable", "up")


def test_stable_branch_approaches_saddle_forward():
    p = SystemParams(0.5, 2.0, 0.03)
    br = manifold_branch(p, "E1", "stable", -1, 1e-6, t_max=5.0, section=None)
    end = br.path.final
    fwd = integrate(p, end, 5.0, 1e-11).final
    assert math.hypot(fwd.x + 0.5, fwd.y) < 1e-5


@pytest.mark.parametrize(
    "kind,d,e,theta",
    [
        ("homoclinic", 0.5, 2.0, 0.03),
        ("homoclinic", 0.5, 2.0, 0.04),
        ("heteroclinic-upper", -1.0, 2.0, -0.1),
        ("homoclinic", -1.0, 2.0, 0.15),
        ("heteroclinic-lower", -1.0, 2.0, 1.17),
    ],
)
def test_gap_matches_independent_oracle(kind, d, e, theta):
    ours = connection_gap(SystemParams(d, e, theta), kind).value
    ref = oracles.gap(d, e, theta, kind)
    assert ours == pytest.approx(ref, abs=1e-6)


def test_gap_sign_convention():
    # unstable branch inside the loop before the homoclinic value, outside after
    assert connection_gap(SystemParams(0.5, 2, 0.02), "homoclinic").value > 0
    assert connection_gap(SystemParams(0.5, 2, 0.05), "homoclinic").value < 0


def test_gap_spec_sides_are_configurable():
    p = SystemParams(-1, 2, -0.1)
    default = connection_gap(p, "heteroclinic-upper")
    explicit = connection_gap(p, GapSpec(GapKind.HETEROCLINIC_UPPER, source="E2", target="E1",
                                         unstable_side=1, stable_side=-1))
    assert explicit.value == default.value and default.source == "E2"


@pytest.mark.parametrize("key", list(ORACLE_ROOTS))
def test_bisection_reproduces_brackets(key):
    kind, d, e = key
    lo, hi = EXPECTED_BRACKETS[key]
    br = bisect_bifurcation(d, e, lo, hi, kind, 1e-4)
    assert br.width <= 1e-4 and br.continuous
    assert lo < br.theta_lo <= br.refined_theta <= br.theta_hi < hi
    assert abs(br.refined_theta - ORACLE_ROOTS[key]) < 1e-6


@pytest.mark.parametrize("key", list(ORACLE_ROOTS))
def test_root_stable_under_seed_offset(key):
    kind, d, e = key
    lo, hi = EXPECTED_BRACKETS[key]
    roots = [bisect_bifurcation(d, e, lo, hi, kind, 1e-4, seed_offset=s).refined_theta
             for s in (1e-7, 1e-6, 1e-5)]
    assert max(roots) - min(roots) < 1e-4


def test_bisection_rejects_same_sign():
    with pytest.raises(ValueError, match="same sign"):
        bisect_bifurcation(0.5, 2, 0.05, 0.1, "homoclinic")


def test_detect_finds_single_bracket_and_parallel_agrees():
    serial = detect_brackets(0.5, 2, 0.0, 0.1, 0.01, "homoclinic")
    parallel = detect_brackets(0.5, 2, 0.0, 0.1, 0.01, "homoclinic", jobs=2)
    assert len(serial.brackets) == 1
    b = serial.brackets[0]
    assert 0.02 < b.theta_lo and b.theta_hi < 0.04
    assert [(x.theta, x.gap) for x in serial.scan] == [(x.theta, x.gap) for x in parallel.scan]
    assert parallel.brackets[0].refined_theta == b.refined_theta


def test_detect_hopf_exact_zero_on_grid():
    res = detect_brackets(0.5, 2, -0.1, 0.1, 0.01, "hopf")
    assert len(res.brackets) == 1 and res.brackets[0].refined_theta == 0.0
    res = detect_brackets(0.5, 2, -0.105, 0.1, 0.01, "hopf")
    assert abs(res.brackets[0].refined_theta) < 1e-12


def test_hopf_indicator_is_half_theta():
    for th in (-0.3, 0.0, 0.4):
        assert hopf_indicator(SystemParams(0.5, 2, th)) == pytest.approx(th / 2)


def test_theta_grid():
    g = theta_grid(-0.3, 1.3, 0.01)
    assert len(g) == 161 and g[0] == -0.3 and g[-1] == 1.3
    with pytest.raises(ValueError):
        theta_grid(1.0, 0.0, 0.1)


def test_limit_cycle_before_homoclinic():
    p = SystemParams(0.5, 2, 0.02)
    lc = detect_limit_cycle(p)
    assert lc is not None and lc.stable and 0 < lc.multiplier < 1
    # fixed point of the return map
    back, period = return_map(p, lc.section_point.x, 1e-10)
    assert back == pytest.approx(lc.section_point.x, abs=1e-8)
    assert period == pytest.approx(lc.period, rel=1e-6)
    assert lc.section_point.x == pytest.approx(0.203438, abs=1e-5)


def test_no_limit_cycle_after_homoclinic():
    search = find_limit_cycle(SystemParams(0.5, 2, 0.1))
    assert search.cycle is None and "do not return" in search.diagnostic


def test_limit_cycle_requires_source():
    with pytest.raises(ValueError, match="source"):
        find_limit_cycle(SystemParams(0.5, 2, -0.01))


def test_hopf_amplitude_scaling():
    thetas = np.array([1e-3, 5e-3, 1e-2])
    amps = np.array([detect_limit_cycle(SystemParams(0.5, 2, t)).amplitude for t in thetas])
    slope = np.polyfit(np.log(thetas), np.log(amps), 1)[0]
    assert abs(slope - 0.5) < 0.1
    # weakly nonlinear amplitude is 2 sqrt(theta) for this normal form
    assert amps[0] / math.sqrt(thetas[0]) == pytest.approx(2.0, rel=0.02)


def test_omega_limits_match_phase_portraits():
    p = SystemParams(0.5, 2, 0.02)
    plus = manifold_branch(p, "E1", "unstable", 1, section=None, t_max=1000)
    minus = manifold_branch(p, "E1", "unstable", -1, section=None, t_max=1000)
    om_plus, om_minus = omega_limit_estimate(plus.path), omega_limit_estimate(minus.path)
    assert om_plus.kind is OmegaKind.CYCLE and om_plus.section_x == pytest.approx(0.203438, abs=1e-4)
    assert om_minus.kind is OmegaKind.EQUILIBRIUM and om_minus.equilibrium.x == -2.0

    q = SystemParams(0.5, 2, 0.1)
    for side in (1, -1):
        br = manifold_branch(q, "E1", "unstable", side, section=None, t_max=1000)
        om = omega_limit_estimate(br.path)
        assert om.kind is OmegaKind.EQUILIBRIUM and om.equilibrium.x == -2.0


def test_omega_limit_needs_forward_trajectory():
    tr = integrate(SystemParams(0.5, 2, 0.02), (0.1, 0), -5.0)
    with pytest.raises(ValueError):
        omega_limit_estimate(tr)
