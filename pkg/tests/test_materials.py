import io
import math

import numpy as np
import pytest

from casimir.constants import CODATA
from casimir.errors import (DomainError, FormatError, InsufficientDataError,
                            UnsupportedModelError, ValidityError)
from casimir.materials import (Bulk, Drude, Perfect, Plasma, Polarization, PrescribedAmplitude,
                               Tabulated, Vacuum, epsilon_imaginary, epsilon_real,
                               ingest_tabulated, medium_wavevector_imaginary,
                               reflection_imaginary, reflection_real)

C = CODATA.c_light
TE, TM = Polarization.TE, Polarization.TM
WP, GD = 1.37e16, 5.32e13


# -- dielectric functions -----------------------------------------------------------

def test_epsilon_examples():
    assert epsilon_imaginary(Drude(2.0, 1.0), 1.0) == 3.0
    assert epsilon_imaginary(Plasma(5.0), 5.0) == 2.0
    np.testing.assert_array_equal(epsilon_imaginary(Vacuum(), [0.0, 1.0, 1e20]), 1.0)


def test_epsilon_real_examples():
    assert epsilon_real(Plasma(2.0), 2.0) == 0.0
    assert epsilon_real(Drude(2.0, 2.0), 2.0) == pytest.approx(0.5 + 0.5j, abs=1e-15)
    assert epsilon_real(Vacuum(), 7.0) == 1.0 + 0j


def test_epsilon_errors():
    with pytest.raises(DomainError):
        epsilon_imaginary(Plasma(1.0), 0.0)
    with pytest.raises(DomainError):
        epsilon_imaginary(Drude(1.0, 1.0), -1.0)
    with pytest.raises(DomainError):
        epsilon_real(Drude(1.0, 1.0), 0.0)
    with pytest.raises(ValidityError):
        Drude(1.0, 0.0)
    with pytest.raises(ValidityError):
        Plasma(-1.0)


def test_medium_wavevector_examples():
    assert medium_wavevector_imaginary(Vacuum(), 3e6, 4e6 * C) == pytest.approx(5e6, rel=1e-15)
    xi = 1e15
    assert medium_wavevector_imaginary(Plasma(xi * math.sqrt(3)), 0.0, xi) == pytest.approx(2 * xi / C, rel=1e-15)


def test_medium_wavevector_transparency(rng):
    k = rng.uniform(0, 1e8, 1000)
    xi = 1e22
    K = medium_wavevector_imaginary(Drude(WP, GD), k, xi)
    kappa = np.hypot(k, xi / C)
    np.testing.assert_allclose(K, kappa, rtol=1e-11)


def lorentz_table(n, w0=1e15, f=2.0, g=1e14, lo=1e-4, hi=1e4):
    w = np.geomspace(w0 * lo, w0 * hi, n)
    loss = f * w0 ** 2 * g * w / ((w0 ** 2 - w ** 2) ** 2 + g ** 2 * w ** 2)
    return Tabulated(w, loss, "lorentz")


def test_tabulated_matches_lorentz_oscillator():
    w0, f, g = 1e15, 2.0, 1e14
    lo, hi = 1e-4 * w0, 1e4 * w0
    xi = np.array([1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0]) * w0
    exact = 1 + f * w0 ** 2 / (w0 ** 2 + xi ** 2 + g * xi)
    coarse = epsilon_imaginary(lorentz_table(2000), xi)
    fine = epsilon_imaginary(lorentz_table(4000), xi)
    # log-linear interpolation error is O(h^2): doubling the grid cuts it by 4,
    # so the fine-grid error is about a third of the coarse-fine difference
    interp_err = np.abs(fine - coarse) / 3
    # loss outside the table: ~ f g w / w0^2 below it, ~ f w0^2 g / w^3 above
    below = (2 / math.pi) * f * g * lo ** 3 / (3 * w0 ** 2 * xi ** 2)
    above = (2 / math.pi) * f * w0 ** 2 * g / (3 * hi ** 3)
    bound = 2 * interp_err + 1.01 * (below + above) + 1e-12 * exact
    assert np.all(np.abs(fine - exact) <= bound)
    assert np.max(np.abs(fine / exact - 1)) < 2e-6


def test_tabulated_converges_with_grid():
    xi = np.array([0.3e15, 2e15])
    exact = 1 + 2e30 / (1e30 + xi ** 2 + 1e14 * xi)
    errs = [np.max(np.abs(epsilon_imaginary(lorentz_table(n), xi) - exact)) for n in (500, 1000, 2000)]
    assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3


def test_tabulated_is_at_least_one(rng):
    model = lorentz_table(300)
    xi = np.geomspace(1e10, 1e20, 50)
    assert np.all(epsilon_imaginary(model, xi) >= 1.0)
    assert np.all(np.diff(epsilon_imaginary(model, xi)) <= 0)


def test_tabulated_has_no_real_axis():
    with pytest.raises(UnsupportedModelError):
        epsilon_real(lorentz_table(10), 1e15)


# -- reflection on the imaginary axis -----------------------------------------------------

def test_reflection_examples():
    for p in (TE, TM):
        assert reflection_imaginary(Perfect(), p, 1e6, 1e14) == -1.0
        assert reflection_imaginary(Bulk(Vacuum()), p, 1e6, 1e14) == 0.0
    xi = 1e15
    r = reflection_imaginary(Bulk(Plasma(xi * math.sqrt(3))), TE, 0.0, xi)
    assert r == pytest.approx(-1 / 3, rel=1e-14)
    assert reflection_imaginary(Bulk(Drude(WP, GD)), TE, 1e6, 0.0) == 0.0


def test_reflection_domain():
    with pytest.raises(DomainError):
        reflection_imaginary(Perfect(), TE, 0.0, 0.0)
    with pytest.raises(DomainError):
        reflection_imaginary(Bulk(Plasma(WP)), TM, -1.0, 1e14)


def sample_modes(rng, n):
    k = 10 ** rng.uniform(2, 9, n)
    xi = 10 ** rng.uniform(10, 19, n)
    # a tenth of the points on the static axis
    xi[: n // 10] = 0.0
    return k, xi


MIRRORS = [Perfect(), Bulk(Vacuum()), Bulk(Plasma(WP)), Bulk(Drude(WP, GD)),
           Bulk(Drude(1e15, 1e15)), PrescribedAmplitude(0.7, 3e14)]


@pytest.mark.parametrize("mirror", MIRRORS, ids=lambda m: type(getattr(m, "dielectric", m)).__name__)
def test_reflection_bounded_in_unit_interval(rng, mirror):
    k, xi = sample_modes(rng, 20_000)
    for p in (TE, TM):
        r = reflection_imaginary(mirror, p, k, xi)
        assert np.all(np.isfinite(r))
        assert np.all((r >= -1.0) & (r <= 0.0))


def test_tabulated_reflection_bounded(rng):
    model = Bulk(lorentz_table(400))
    k = 10 ** rng.uniform(3, 8, 10_000)
    xi = np.repeat(np.geomspace(1e11, 1e18, 100), 100)
    for p in (TE, TM):
        r = reflection_imaginary(model, p, k, xi)
        assert np.all((r >= -1.0) & (r <= 0.0))


@pytest.mark.parametrize("mirror", [Bulk(Plasma(WP)), Bulk(Drude(WP, GD)), PrescribedAmplitude(0.9, 1e15)],
                         ids=["plasma", "drude", "prescribed"])
def test_reflection_transparent_at_high_frequency(mirror):
    xi = np.geomspace(1e14, 1e24, 60)
    for p in (TE, TM):
        r = np.abs(reflection_imaginary(mirror, p, 1e6, xi))
        assert np.all(r <= 1.0)
        # Drude TM may rise slightly at small xi; decay is monotone past 1e16
        assert np.all(np.diff(r[xi > 1e16]) <= 0)
        assert r[-1] < 1e-10


def test_drude_converges_to_plasma_away_from_zero():
    xi = np.geomspace(1e13, 1e17, 200)
    k = 1e6
    gaps = []
    for g in (1e12, 1e11, 1e10, 1e9):
        gap = max(np.max(np.abs(reflection_imaginary(Bulk(Drude(WP, g)), p, k, xi)
                                - reflection_imaginary(Bulk(Plasma(WP)), p, k, xi)))
                  for p in (TE, TM))
        gaps.append(gap)
    assert all(b < a / 5 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-4


def test_static_limits_differ_between_drude_and_plasma():
    k = 1e6
    kp = WP / C
    assert reflection_imaginary(Bulk(Drude(WP, 1e-6 * WP)), TE, k, 0.0) == 0.0
    plasma = reflection_imaginary(Bulk(Plasma(WP)), TE, k, 0.0)
    assert plasma == pytest.approx((k - math.hypot(k, kp)) / (k + math.hypot(k, kp)), rel=1e-13)
    assert plasma < 0
    for m in (Bulk(Drude(WP, GD)), Bulk(Plasma(WP))):
        assert reflection_imaginary(m, TM, k, 0.0) == -1.0


@pytest.mark.parametrize("mirror", [Bulk(Plasma(WP)), Perfect(), PrescribedAmplitude(0.5, 1e14)],
                         ids=["plasma", "perfect", "prescribed"])
def test_static_limit_is_continuous(mirror):
    k = np.array([1e4, 1e6, 1e8])
    for p in (TE, TM):
        at0 = reflection_imaginary(mirror, p, k, 0.0)
        near = reflection_imaginary(mirror, p, k, 1e-3)
        np.testing.assert_allclose(near, at0, rtol=1e-10, atol=1e-14)


# -- reflection on the real axis -------------------------------------------------------------

def test_prescribed_real_example():
    # -0.5 / (1 - i)^2 = -0.5 / (-2i) = -0.25i
    w = 2e14
    r = reflection_real(PrescribedAmplitude(0.5, w), TE, 1e5, w)
    assert r == pytest.approx(-0.25j, abs=1e-15)


def test_plasma_real_above_plasma_frequency():
    m = Bulk(Plasma(WP))
    w = np.geomspace(2 * WP, 1e4 * WP, 200)
    r = np.abs(reflection_real(m, TE, 0.0, w))
    assert np.all(r <= 1.0) and np.all(np.diff(r) < 0)
    assert r[-1] < 1e-7


def test_real_axis_rejects_perfect_and_bad_frequencies():
    with pytest.raises(UnsupportedModelError):
        reflection_real(Perfect(), TE, 0.0, 1e14)
    with pytest.raises(DomainError):
        reflection_real(Bulk(Plasma(WP)), TE, 0.0, -1e14)
    with pytest.raises(DomainError):
        reflection_real(Bulk(Plasma(WP)), TE, 0.0, 1e14 - 1e10j)


@pytest.mark.parametrize("mirror", [Bulk(Drude(WP, GD)), Bulk(Plasma(WP)), PrescribedAmplitude(0.8, 1e15)],
                         ids=["drude", "plasma", "prescribed"])
def test_real_axis_conjugate_symmetry(rng, mirror):
    omega = rng.uniform(1e13, 1e17, 2000) + 1j * rng.uniform(1e10, 1e15, 2000)
    k = rng.uniform(0, 1e8, 2000)
    for p in (TE, TM):
        a = reflection_real(mirror, p, k, omega)
        b = reflection_real(mirror, p, k, -np.conj(omega))
        np.testing.assert_allclose(np.conj(a), b, rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize("mirror", [Bulk(Drude(WP, GD)), Bulk(Plasma(WP)), Bulk(Drude(1e15, 1e15)),
                                    PrescribedAmplitude(1.0, 1e15)],
                         ids=["drude", "plasma", "lossy", "prescribed"])
def test_passive_on_propagating_sector(rng, mirror):
    omega = 10 ** rng.uniform(12, 18, 20_000)
    k = rng.uniform(0, 1, omega.size) * omega / C
    for p in (TE, TM):
        r = reflection_real(mirror, p, k, omega)
        assert np.all(np.abs(r) <= 1.0 + 1e-12)


def test_real_axis_matches_imaginary_axis_continuation():
    # r(omega) evaluated at omega = i xi through the complex path
    xi = np.geomspace(1e13, 1e17, 20)
    for m in (Bulk(Drude(WP, GD)), PrescribedAmplitude(0.6, 1e15)):
        for p in (TE, TM):
            a = reflection_real(m, p, 1e6, 1j * xi)
            b = reflection_imaginary(m, p, 1e6, xi)
            np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)


# -- ingest -----------------------------------------------------------------------------

def table_text(n, rng=None):
    w = np.geomspace(1e13, 1e17, n)
    rows = [f"{a:.17g} {0.5 + 0.1 * i:.6g}" for i, a in enumerate(w)]
    if rng is not None:
        rng.shuffle(rows)
    return "# omega eps_imag\n" + "\n".join(rows) + "\n"


def test_ingest_well_formed():
    t = ingest_tabulated(table_text(100), "x")
    assert t.omega.size == 100 and t.name == "x"
    assert not t.omega.flags.writeable


def test_ingest_file_object_and_commas():
    text = "1e14, 0.1\n2e14,0.2\n\n# comment\n3e14 0.3\n4e14\t0.4\n"
    t = ingest_tabulated(io.StringIO(text))
    np.testing.assert_array_equal(t.eps_imag, [0.1, 0.2, 0.3, 0.4])


def test_ingest_negative_loss():
    text = table_text(10).replace(" 0.7", " -0.7", 1)
    with pytest.raises(ValidityError):
        ingest_tabulated(text)


def test_ingest_shuffled(rng):
    with pytest.raises(FormatError):
        ingest_tabulated(table_text(20, rng))


def test_ingest_short_and_malformed():
    with pytest.raises(InsufficientDataError):
        ingest_tabulated("1 1\n2 2\n3 3\n")
    with pytest.raises(FormatError):
        ingest_tabulated("1 1\n2 2 2\n3 3\n4 4\n")
    with pytest.raises(FormatError):
        ingest_tabulated("1 1\n2 x\n3 3\n4 4\n")
