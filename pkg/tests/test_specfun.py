import cmath

import mpmath as mp
import numpy as np
import pytest

from lingrid.specfun import (KummerConvergenceError, KummerQuery, Regime, gamma, kummer_m,
                             kummer_pair_check, log_gamma)

mp.mp.dps = 40

# M(-0.5i, 0.5, -10i) from a 60-digit Taylor summation (97 terms)
TABULATED = complex(-0.1140684668267555722282664, 0.7182490565126374272574965)


def mp_m(a, b, z):
    return complex(mp.hyp1f1(a, b, z))


def production_family(n, seed=0, max_z=120.0):
    """Random (a, b, z) of the two-state channel family."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        lam = 10 ** rng.uniform(-2, 2)
        # value and derivative parameters for both fundamental solutions
        a0, b = [(0.0, 0.5), (1.0, 1.5), (0.5, 1.5), (1.5, 2.5)][rng.integers(4)]
        a = complex(a0, -0.5 * lam)
        z = complex(0.0, rng.choice([-1, 1]) * 10 ** rng.uniform(-1, np.log10(max_z)))
        out.append((a, b, z))
    return out


@pytest.mark.parametrize("z", [0.5 + 0.5j, 3 - 40j, -2 + 60j, 10.5 + 1j, 0.3 - 100j, 1e-3 + 2j])
def test_log_gamma_vs_mpmath(z):
    ref = complex(mp.loggamma(z))
    got = log_gamma(z)
    assert abs(cmath.exp(got - ref) - 1) < 1e-13


def test_log_gamma_box():
    rng = np.random.default_rng(1)
    for _ in range(300):
        z = complex(rng.uniform(-60, 60), rng.uniform(-60, 60))
        if abs(z.imag) < 1e-3 and z.real < 0:
            continue
        ref = complex(mp.loggamma(z))
        assert abs(cmath.exp(log_gamma(z) - ref) - 1) < 1e-13, z


def test_gamma_poles_and_values():
    assert gamma(5) == pytest.approx(24, rel=1e-14)
    assert gamma(0.5) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    with pytest.raises(ValueError):
        log_gamma(-2)


def test_query_validation():
    with pytest.raises(ValueError):
        KummerQuery(1j, -1.0, 1j)
    with pytest.raises(ValueError):
        KummerQuery(1j, 0.5, 1j, rel_tol=1e-16)
    with pytest.raises(ValueError):
        KummerQuery(1j, 0.5, 1j, rel_tol=1e-5)


@pytest.mark.parametrize("a,b", [(2 - 3j, 0.5), (-1j, 1.5), (0.3, 2.5)])
def test_trivial_cases(a, b):
    assert kummer_m(KummerQuery(a, b, 0)).value == 1
    assert kummer_m(KummerQuery(0, b, 17 - 4j)).value == 1
    r = kummer_m(KummerQuery(a, a.real if isinstance(a, float) else b, 0))
    assert r.value == 1
    z = 2.5 - 7j
    r = kummer_m(KummerQuery(b, b, z))
    assert abs(r.value - cmath.exp(z)) <= 1e-14 * abs(cmath.exp(z))


def test_tabulated_value():
    r = kummer_m(KummerQuery(-0.5j, 0.5, -10j, 1e-12))
    assert r.certified
    assert abs(r.value - TABULATED) <= 1e-12 * abs(TABULATED)
    assert abs(mp_m(-0.5j, 0.5, -10j) - TABULATED) < 1e-15


@pytest.mark.parametrize("a,b,z,tol,limit", [
    (0, 0.5, 3j, 1e-12, 0.0),
    (-1j, 0.5, -20j, 1e-10, 1e-10),
    (0.5 - 1j, 1.5, -100j, 1e-9, 1e-9),
])
def test_pair_check_examples(a, b, z, tol, limit):
    res = kummer_pair_check(KummerQuery(a, b, z, tol))
    assert res <= max(limit, 1e-15)
    assert res <= 10 * tol


def test_pair_check_uncertified_raises():
    with pytest.raises(KummerConvergenceError):
        kummer_pair_check(KummerQuery(-50j, 0.5, -100j, 1e-10))


def test_regimes():
    assert kummer_m(KummerQuery(-0.5j, 0.5, -2j)).regime is Regime.SERIES
    assert kummer_m(KummerQuery(-0.5j, 0.5, -500j, 1e-10)).regime is Regime.ASYMPTOTIC
    # lambda = 100 at moderate |z| defeats both double-precision regimes
    r = kummer_m(KummerQuery(-50j, 0.5, -100j, 1e-10))
    assert r.regime is Regime.ODE_FALLBACK and not r.certified
    assert r.est_error > 1e-10


def test_values_against_mpmath():
    for a, b, z in production_family(120, seed=2):
        r = kummer_m(KummerQuery(a, b, z, 1e-10))
        if not r.certified:
            continue
        ref = mp_m(a, b, z)
        assert abs(r.value - ref) <= 1e-10 * abs(ref), (a, b, z)
        dref = a / b * mp_m(a + 1, b + 1, z)
        assert abs(r.deriv - dref) <= 1e-10 * abs(dref), (a, b, z)


def test_error_estimate_is_honest():
    """The reported error bounds the true error, certified or not."""
    for a, b, z in production_family(200, seed=3):
        r = kummer_m(KummerQuery(a, b, z, 1e-12))
        ref = mp_m(a, b, z)
        if not np.isfinite(abs(r.value)):
            continue
        assert abs(r.value - ref) <= r.est_error * abs(ref) + 1e-300, (a, b, z, r)


def test_derivative_finite_difference():
    for a, b, z in production_family(60, seed=4, max_z=100):
        q = KummerQuery(a, b, z, 1e-12)
        r = kummer_m(q)
        h = abs(z) * 1e-5
        rp = kummer_m(KummerQuery(a, b, z + h, 1e-12))
        rm = kummer_m(KummerQuery(a, b, z - h, 1e-12))
        if not (r.certified and rp.certified and rm.certified):
            continue
        fd = (rp.value - rm.value) / (2 * h)
        assert abs(fd - r.deriv) <= 1e-6 * abs(r.deriv), (a, b, z)


def test_overlap_band_agreement():
    """Where series and asymptotic both certify in the overlap band they agree."""
    from lingrid.specfun import _asymptotic, _series
    both = 0
    rng = np.random.default_rng(5)
    for _ in range(300):
        lam = rng.uniform(0, 10)
        b = rng.choice([0.5, 1.5])
        a = complex(0.0 if b == 0.5 else 0.5, -0.5 * lam)
        z = complex(0, rng.choice([-1, 1]) * rng.uniform(15, 60))
        s, t = _series(a, b, z), _asymptotic(a, b, z)
        if s.rel_err <= 1e-10 and t.rel_err <= 1e-10:
            both += 1
            assert abs(s.value - t.value) <= 1e-8 * abs(s.value)
    assert both > 15
