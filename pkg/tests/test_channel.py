"""Tests for channel parameter derivation and sample generation.

Distributional checks compare deterministic (fixed-seed) sample sets
against closed-form moments and quadrature CDFs, so they are exact
regression tests, not flaky statistical ones.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from risfso import analytic, channel
from risfso.errors import DomainError

# Frozen against a 30-digit arbitrary-precision evaluation of the
# alpha/beta formulas at cn2=5e-14 m^(-2/3), 1550 nm, 300 m, a=0.1 m.
CN2 = 5e-14
WAVELENGTH = 1550e-9
PATH_LENGTH = 300.0
APERTURE = 0.1
ALPHA_REF = 1990.17722498236
BETA_REF = 2489.26965365300
RYTOV_REF = 0.0445128267031

GEO_ARGS = dict(
    sigma_theta=1e-3,
    sigma_beta=0.25e-3,
    distance_l1=350.0,
    distance_l2=250.0,
    beam_width=1.2,
    aperture_radius=0.1,
)


def default_geometry(**overrides):
    args = {**GEO_ARGS, **overrides}
    return channel.derive_pointing(**args)


class TestDeriveTurbulence:
    def test_frozen_reference_point(self):
        t = channel.derive_turbulence(CN2, WAVELENGTH, PATH_LENGTH, APERTURE)
        assert t.alpha == pytest.approx(ALPHA_REF, rel=1e-12)
        assert t.beta == pytest.approx(BETA_REF, rel=1e-12)
        assert t.provenance.rytov_var == pytest.approx(RYTOV_REF, rel=1e-10)

    def test_weak_turbulence_limit(self):
        # As Cn^2 -> 0 the scintillation vanishes and both shapes blow up.
        t = channel.derive_turbulence(1e-18, WAVELENGTH, PATH_LENGTH, APERTURE)
        assert t.alpha > 1e5 and t.beta > 1e5

    def test_monotone_in_cn2(self):
        values = [
            channel.derive_turbulence(c, WAVELENGTH, PATH_LENGTH, APERTURE)
            for c in (1e-15, 1e-14, 1e-13)
        ]
        alphas = [t.alpha for t in values]
        betas = [t.beta for t in values]
        assert alphas == sorted(alphas, reverse=True)
        assert betas == sorted(betas, reverse=True)

    @pytest.mark.parametrize("bad", ["cn2", "wavelength", "path_length", "aperture_radius"])
    def test_rejects_nonpositive_inputs(self, bad):
        args = dict(
            cn2=CN2,
            wavelength=WAVELENGTH,
            path_length=PATH_LENGTH,
            aperture_radius=APERTURE,
        )
        args[bad] = 0.0
        with pytest.raises(DomainError):
            channel.derive_turbulence(**args)

    def test_provenance_consistency_enforced(self):
        t = channel.derive_turbulence(CN2, WAVELENGTH, PATH_LENGTH, APERTURE)
        with pytest.raises(DomainError):
            channel.TurbulenceParams(
                alpha=t.alpha * 1.01, beta=t.beta, provenance=t.provenance
            )

    def test_bare_params_need_no_provenance(self):
        t = channel.TurbulenceParams(alpha=15.0, beta=10.0)
        assert t.provenance is None
        with pytest.raises(DomainError):
            channel.TurbulenceParams(alpha=-1.0, beta=10.0)


class TestDerivePointing:
    def test_peak_gain_formula(self):
        geo = default_geometry()
        nu = math.sqrt(math.pi / 2.0) * GEO_ARGS["aperture_radius"] / GEO_ARGS["beam_width"]
        assert geo.nu == pytest.approx(nu, rel=1e-15)
        assert geo.a0 == pytest.approx(math.erf(nu) ** 2, rel=1e-15)

    def test_peak_gain_approaches_one_for_wide_aperture(self):
        geo = default_geometry(aperture_radius=5.0)
        assert geo.a0 == pytest.approx(1.0, abs=1e-10)
        with pytest.raises(DomainError):
            default_geometry(aperture_radius=50.0)

    def test_exponent_quarter_under_doubled_jitter(self):
        # c is inversely quadratic in the jitter scale, so doubling both
        # deviations divides the exponent by exactly four.
        base = default_geometry()
        doubled = default_geometry(
            sigma_theta=2 * GEO_ARGS["sigma_theta"],
            sigma_beta=2 * GEO_ARGS["sigma_beta"],
        )
        assert doubled.c == pytest.approx(base.c / 4.0, rel=1e-14)

    def test_exponent_matches_radial_variance(self):
        geo = default_geometry()
        # Var(r) per axis: ((1 + L1/L2) sigma_theta)^2 + (2 sigma_beta)^2,
        # scaled by L2^2; c = wzeq2 / (4 sigma_r_axis^2).
        var_axis = geo.effective_jitter_var * geo.distance_l2 ** 2
        assert geo.c == pytest.approx(geo.wzeq2 / (4.0 * var_axis), rel=1e-14)

    def test_from_exponent_roundtrip(self):
        for c in (0.5, 1.0, 3.7):
            geo = channel.PointingGeometry.from_exponent(
                c, beam_width=1.2, aperture_radius=0.1, distance_l2=250.0
            )
            assert geo.c == pytest.approx(c, rel=1e-13)
            assert geo.distance_l1 == 0.0 and geo.sigma_beta == 0.0

    def test_rejects_all_zero_jitter(self):
        with pytest.raises(DomainError):
            default_geometry(sigma_theta=0.0, sigma_beta=0.0)

    def test_rejects_bad_geometry(self):
        with pytest.raises(DomainError):
            default_geometry(distance_l2=0.0)
        with pytest.raises(DomainError):
            default_geometry(beam_width=-1.0)
        with pytest.raises(DomainError):
            channel.PointingGeometry.from_exponent(0.0, 1.2, 0.1, 250.0)


class TestRandomStream:
    def test_same_seed_reproduces(self):
        a = channel.RandomStream(2024, 3).generator().standard_normal(16)
        b = channel.RandomStream(2024, 3).generator().standard_normal(16)
        assert np.array_equal(a, b)

    def test_distinct_stream_ids_differ(self):
        a = channel.RandomStream(2024, 0).generator().standard_normal(16)
        b = channel.RandomStream(2024, 1).generator().standard_normal(16)
        assert not np.array_equal(a, b)


@pytest.fixture(scope="module")
def turb():
    return channel.TurbulenceParams(alpha=15.0, beta=10.0)


@pytest.fixture(scope="module")
def geo():
    return default_geometry()


class TestSamplers:
    N_SAMPLES = 200_000

    def test_turbulence_gain_moments(self, turb):
        h = channel.sample_h_a(turb, channel.RandomStream(7, 0), self.N_SAMPLES)
        assert np.all(h > 0)
        # E[h] = 1; E[h^2] = (1 + 1/alpha)(1 + 1/beta).
        m2 = (1 + 1 / turb.alpha) * (1 + 1 / turb.beta)
        assert h.mean() == pytest.approx(1.0, abs=4 * h.std() / math.sqrt(len(h)))
        hh = h * h
        assert hh.mean() == pytest.approx(m2, abs=4 * hh.std() / math.sqrt(len(h)))

    def test_turbulence_gain_cdf(self, turb):
        # Empirical CDF against P(XY <= h) = E_X[F_beta-gamma(h / X)],
        # computed by quadrature over the alpha-Gamma mixing density.
        h = channel.sample_h_a(turb, channel.RandomStream(11, 0), self.N_SAMPLES)
        a, b = turb.alpha, turb.beta
        for q in (0.6, 1.0, 1.5):
            truth, _ = integrate.quad(
                lambda x: stats.gamma.pdf(x, a, scale=1 / a)
                * stats.gamma.cdf(q / x, b, scale=1 / b),
                0,
                np.inf,
            )
            emp = float(np.mean(h <= q))
            tol = 4 * math.sqrt(truth * (1 - truth) / len(h))
            assert emp == pytest.approx(truth, abs=tol)

    def test_pointing_gain_support_and_law(self, geo):
        h = channel.sample_h_p(geo, channel.RandomStream(13, 0), self.N_SAMPLES)
        assert np.all(h > 0) and np.all(h <= geo.a0)
        # CDF of h_p is (h / A0)^c on (0, A0].
        stat, _ = stats.kstest(h, lambda x: np.clip(x / geo.a0, 0, 1) ** geo.c)
        assert stat < 2.0 / math.sqrt(self.N_SAMPLES)

    def test_pointing_gain_degenerate_jitter(self):
        geo = default_geometry(sigma_theta=0.0)
        assert geo.c > 0
        h = channel.sample_h_p(
            default_geometry(sigma_theta=1e-12, sigma_beta=0.0),
            channel.RandomStream(1, 0),
            100,
        )
        assert np.allclose(h, default_geometry().a0, rtol=1e-6)

    def test_aggregate_matches_clt_moments(self, turb, geo):
        cfg = channel.LinkConfig(n_elements=32, gamma_bar=2.5)
        z, gam = channel.sample_aggregate(turb, geo, cfg, channel.RandomStream(17, 0), 50_000)
        assert np.array_equal(gam, cfg.gamma_bar * z)
        ms = analytic.moments(turb, geo, cfg.n_elements)
        se_mean = z.std(ddof=1) / math.sqrt(len(z))
        assert z.mean() == pytest.approx(ms.m, abs=4 * se_mean)
        # Variance comparison with a generous 4-sigma-equivalent band.
        assert z.var(ddof=1) == pytest.approx(ms.delta_sq, rel=0.05)

    def test_aggregate_reproducible(self, turb, geo):
        cfg = channel.LinkConfig(n_elements=8)
        z1, _ = channel.sample_aggregate(turb, geo, cfg, channel.RandomStream(5, 2), 64)
        z2, _ = channel.sample_aggregate(turb, geo, cfg, channel.RandomStream(5, 2), 64)
        assert np.array_equal(z1, z2)


class TestDensities:
    def test_pdf_b_matches_sampler_histogram(self, turb, geo):
        h = channel.sample_h_a(
            turb, channel.RandomStream(19, 0), 200_000
        ) * channel.sample_h_p(geo, channel.RandomStream(19, 1), 200_000)
        b = h * h
        edges = np.quantile(b, np.linspace(0.05, 0.95, 7))
        for lo, hi in zip(edges[:-1], edges[1:]):
            prob, _ = integrate.quad(lambda x: channel.pdf_b(x, turb, geo), lo, hi)
            emp = float(np.mean((b > lo) & (b <= hi)))
            tol = 5 * math.sqrt(prob * (1 - prob) / len(b))
            assert emp == pytest.approx(prob, abs=tol)

    def test_pdf_b_rejects_nonpositive(self, turb, geo):
        with pytest.raises(DomainError):
            channel.pdf_b(0.0, turb, geo)

    def test_pdf_gamma_clt_is_normalized_gaussian(self):
        m, d2, gbar = 3.0, 0.7, 2.0
        xs = np.linspace(-5, 20, 9)
        ref = stats.norm.pdf(xs, loc=gbar * m, scale=gbar * math.sqrt(d2))
        assert np.allclose(channel.pdf_gamma_clt(xs, m, d2, gbar), ref, rtol=1e-12)
        with pytest.raises(DomainError):
            channel.pdf_gamma_clt(1.0, m, -1.0, gbar)

    def test_clt_error_shrinks_with_elements(self, turb, geo):
        # KS distance between sampled aggregate SNR and its Gaussian
        # approximation must shrink as the element count grows.
        dists = []
        for n in (4, 16, 256):
            cfg = channel.LinkConfig(n_elements=n, gamma_bar=1.0)
            _, gam = channel.sample_aggregate(
                turb, geo, cfg, channel.RandomStream(23, n), 20_000
            )
            ms = analytic.moments(turb, geo, n)
            stat, _ = stats.kstest(
                gam, stats.norm(loc=ms.m, scale=math.sqrt(ms.delta_sq)).cdf
            )
            dists.append(stat)
        assert dists[0] > dists[1] > dists[2]


class TestLinkConfig:
    def test_db_conversion(self):
        assert channel.LinkConfig.db_to_linear(0.0) == 1.0
        assert channel.LinkConfig.db_to_linear(10.0) == pytest.approx(10.0, rel=1e-15)
        cfg = channel.LinkConfig.from_db(n_elements=4, gamma_bar_db=20.0, gamma_th_db=3.0)
        assert cfg.gamma_bar == pytest.approx(100.0, rel=1e-15)
        assert cfg.gamma_th == pytest.approx(10 ** 0.3, rel=1e-15)

    def test_validation(self):
        with pytest.raises(DomainError):
            channel.LinkConfig(n_elements=0)
        with pytest.raises(DomainError):
            channel.LinkConfig(gamma_bar=0.0)
        with pytest.raises(DomainError):
            channel.LinkConfig(gamma_th=-1.0)
        with pytest.raises(DomainError):
            channel.LinkConfig(psi=0.0)
