"""Channel parameter derivation and sample generation.

Covers the Gamma-Gamma turbulence gain, the misalignment (pointing
error) gain produced by transmitter and reflecting-surface jitter, and
the aggregate squared-gain sum over the N reflecting elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from . import numerics

__all__ = [
    "TurbulenceProvenance",
    "TurbulenceParams",
    "PointingGeometry",
    "LinkConfig",
    "RandomStream",
    "derive_turbulence",
    "derive_pointing",
    "sample_h_a",
    "sample_h_p",
    "sample_aggregate",
    "pdf_b",
    "pdf_gamma_clt",
]

_CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class TurbulenceProvenance:
    """Physical inputs that generated a (alpha, beta) pair."""

    cn2: float  # refractive-index structure constant, m^(-2/3)
    wavelength: float  # m
    path_length: float  # m
    aperture_radius: float  # m
    rytov_var: float  # sigma_R^2
    kappa2: float


@dataclass(frozen=True)
class TurbulenceParams:
    """Gamma-Gamma shape parameters, optionally with their physical origin."""

    alpha: float
    beta: float
    provenance: Optional[TurbulenceProvenance] = None

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError("alpha and beta must be positive")
        if self.provenance is not None:
            p = self.provenance
            ref_alpha, ref_beta, _, _ = _alpha_beta_from_physics(
                p.cn2, p.wavelength, p.path_length, p.aperture_radius
            )
            for got, want, name in (
                (self.alpha, ref_alpha, "alpha"),
                (self.beta, ref_beta, "beta"),
            ):
                if abs(got - want) > _CONSISTENCY_TOL * abs(want):
                    raise DomainError(
                        f"{name}={got} inconsistent with provenance (expected {want})"
                    )


def _alpha_beta_from_physics(
    cn2: float, wavelength: float, path_length: float, aperture_radius: float
) -> Tuple[float, float, float, float]:
    """(alpha, beta, sigma_R^2, kappa^2) from the atmospheric condition."""
    k_w = 2.0 * math.pi / wavelength
    sigma_r2 = 0.5 * cn2 * k_w ** (7.0 / 6.0) * path_length ** (11.0 / 6.0)
    kappa2 = k_w * (2.0 * aperture_radius) ** 2 / (4.0 * path_length)
    s65 = sigma_r2 ** (6.0 / 5.0)  # sigma_R^(12/5)
    alpha = 1.0 / math.expm1(
        0.49 * sigma_r2 / (1.0 + 0.18 * kappa2 + 0.56 * s65) ** (7.0 / 6.0)
    )
    beta = 1.0 / math.expm1(
        0.51 * sigma_r2 * (1.0 + 0.69 * s65) ** (-5.0 / 6.0)
        / (1.0 + 0.9 * kappa2 + 0.62 * kappa2 * s65) ** (5.0 / 6.0)
    )
    return alpha, beta, sigma_r2, kappa2


def derive_turbulence(
    cn2: float, wavelength: float, path_length: float, aperture_radius: float
) -> TurbulenceParams:
    """Gamma-Gamma (alpha, beta) from the atmospheric condition.

    Uses the Rytov variance sigma_R^2 = 0.5 Cn^2 k_w^(7/6) L^(11/6) and
    the aperture parameter kappa^2 = k_w D_a^2 / (4 L), D_a = 2a.
    """
    for name, val in (
        ("cn2", cn2),
        ("wavelength", wavelength),
        ("path_length", path_length),
        ("aperture_radius", aperture_radius),
    ):
        if not val > 0:
            raise DomainError(f"{name} must be positive, got {val}")
    alpha, beta, sigma_r2, kappa2 = _alpha_beta_from_physics(
        cn2, wavelength, path_length, aperture_radius
    )
    prov = TurbulenceProvenance(cn2, wavelength, path_length, aperture_radius, sigma_r2, kappa2)
    return TurbulenceParams(alpha=alpha, beta=beta, provenance=prov)


@dataclass(frozen=True)
class PointingGeometry:
    """Misalignment model geometry and its derived constants.

    sigma_theta is the transmitter jitter std, sigma_beta the reflecting
    surface jitter std (both rad). The derived quantities are the
    aperture/beam ratio nu, the peak gain A0 = erf(nu)^2, the equivalent
    beam width squared wzeq2, and the power-law exponent c of the
    pointing-gain density.
    """

    sigma_theta: float
    sigma_beta: float
    distance_l1: float
    distance_l2: float
    beam_width: float
    aperture_radius: float
    nu: float = field(init=False)
    a0: float = field(init=False)
    wzeq2: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        if self.sigma_theta < 0 or self.sigma_beta < 0:
            raise DomainError("jitter deviations must be non-negative")
        if self.distance_l1 < 0 or not self.distance_l2 > 0:
            raise DomainError("require L1 >= 0 and L2 > 0")
        if not (self.beam_width > 0 and self.aperture_radius > 0):
            raise DomainError("beam width and aperture radius must be positive")
        nu = math.sqrt(math.pi / 2.0) * self.aperture_radius / self.beam_width
        a0 = math.erf(nu) ** 2
        try:
            wzeq2 = (
                self.beam_width ** 2
                * math.sqrt(math.pi)
                * math.erf(nu)
                * math.exp(nu * nu)
                / (2.0 * nu)
            )
        except OverflowError as exc:
            raise DomainError(
                "aperture radius is too large relative to the beam width"
            ) from exc
        denom = (
            4.0 * self.sigma_theta ** 2 * self.total_distance ** 2
            + 16.0 * self.sigma_beta ** 2 * self.distance_l2 ** 2
        )
        if not denom > 0:
            raise DomainError("at least one jitter deviation must be positive")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "wzeq2", wzeq2)
        object.__setattr__(self, "c", wzeq2 / denom)

    @property
    def total_distance(self) -> float:
        return self.distance_l1 + self.distance_l2

    @property
    def effective_jitter_var(self) -> float:
        """Variance of each component of the superimposed jitter angle."""
        ratio = 1.0 + self.distance_l1 / self.distance_l2
        return ratio ** 2 * self.sigma_theta ** 2 + 4.0 * self.sigma_beta ** 2

    @classmethod
    def from_exponent(
        cls, c: float, beam_width: float, aperture_radius: float, distance_l2: float
    ) -> "PointingGeometry":
        """Geometry realizing a prescribed power-law exponent c.

        The surface jitter is folded into an equivalent transmitter
        jitter over a single hop of length L2, which leaves the
        pointing-gain law (and hence every statistic) unchanged.
        """
        if not c > 0:
            raise DomainError("exponent c must be positive")
        probe = cls(1e-3, 0.0, 0.0, distance_l2, beam_width, aperture_radius)
        sigma_theta = math.sqrt(probe.wzeq2 / (4.0 * c)) / distance_l2
        return cls(sigma_theta, 0.0, 0.0, distance_l2, beam_width, aperture_radius)


def derive_pointing(
    sigma_theta: float,
    sigma_beta: float,
    distance_l1: float,
    distance_l2: float,
    beam_width: float,
    aperture_radius: float,
) -> PointingGeometry:
    """Build a PointingGeometry, populating nu, A0, wzeq2 and c."""
    return PointingGeometry(
        sigma_theta, sigma_beta, distance_l1, distance_l2, beam_width, aperture_radius
    )


@dataclass(frozen=True)
class LinkConfig:
    """Link-level settings: element count, average SNR, threshold, modulation."""

    n_elements: int = 128
    gamma_bar: float = 1.0  # linear average SNR
    gamma_th: float = 1.0  # linear SNR threshold
    psi: float = 1.0  # 1 BPSK, 0.5 coherent BFSK, 0.75 MSK

    def __post_init__(self):
        if self.n_elements < 1:
            raise DomainError("n_elements must be >= 1")
        if not self.gamma_bar > 0:
            raise DomainError("gamma_bar must be positive")
        if self.gamma_th < 0:
            raise DomainError("gamma_th must be non-negative")
        if not self.psi > 0:
            raise DomainError("psi must be positive")

    @staticmethod
    def db_to_linear(x_db: float) -> float:
        return 10.0 ** (x_db / 10.0)

    @classmethod
    def from_db(cls, n_elements=128, gamma_bar_db=0.0, gamma_th_db=0.0, psi=1.0):
        return cls(
            n_elements=n_elements,
            gamma_bar=cls.db_to_linear(gamma_bar_db),
            gamma_th=cls.db_to_linear(gamma_th_db),
            psi=psi,
        )


@dataclass(frozen=True)
class RandomStream:
    """Reproducible, independent random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


GeneratorLike = Union[RandomStream, np.random.Generator]


def _as_generator(rng: GeneratorLike) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    return rng


def sample_h_a(t: TurbulenceParams, rng: GeneratorLike, size=None):
    """Unit-mean Gamma-Gamma turbulence gain samples.

    Drawn as the product of two independent unit-mean Gamma variates
    with shapes alpha and beta, which is exactly the doubly-stochastic
    construction behind the Gamma-Gamma density.
    """
    g = _as_generator(rng)
    x = g.gamma(t.alpha, 1.0 / t.alpha, size)
    y = g.gamma(t.beta, 1.0 / t.beta, size)
    return x * y


def sample_h_p(geo: PointingGeometry, rng: GeneratorLike, size=None):
    """Pointing-error gain samples in (0, A0].

    Draws the transmitter and surface jitter components, superimposes
    them, and maps the resulting radial offset r = theta' * L2 through
    the Gaussian beam profile.
    """
    g = _as_generator(rng)
    ratio = 1.0 + geo.distance_l1 / geo.distance_l2
    tx = g.normal(0.0, geo.sigma_theta, size)
    ty = g.normal(0.0, geo.sigma_theta, size)
    bx = g.normal(0.0, geo.sigma_beta, size)
    by = g.normal(0.0, geo.sigma_beta, size)
    tpx = ratio * tx + 2.0 * bx
    tpy = ratio * ty + 2.0 * by
    r2 = (tpx * tpx + tpy * tpy) * geo.distance_l2 ** 2
    return geo.a0 * np.exp(-2.0 * r2 / geo.wzeq2)


def sample_aggregate(
    t: TurbulenceParams,
    geo: PointingGeometry,
    cfg: LinkConfig,
    rng: GeneratorLike,
    size=None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw (Z, gamma) where Z = sum_k (h_a_k h_p_k)^2 and gamma = gamma_bar Z."""
    g = _as_generator(rng)
    shape = (cfg.n_elements,) if size is None else (size, cfg.n_elements)
    h = sample_h_a(t, g, shape) * sample_h_p(geo, g, shape)
    z = np.sum(h * h, axis=-1)
    return z, cfg.gamma_bar * z


def pdf_b(x, t: TurbulenceParams, geo: PointingGeometry):
    """Density of the per-element squared composite gain B = (h_a h_p)^2."""
    a, b, c, a0 = t.alpha, t.beta, geo.c, geo.a0
    pref = a * b * c / (2.0 * math.gamma(a) * math.gamma(b) * a0)
    bees = (c - 1.0, a - 1.0, b - 1.0)

    def one(xi: float) -> float:
        if not xi > 0:
            raise DomainError(f"pdf_b requires x > 0, got {xi}")
        g = numerics.meijer_g_1330(c, bees, a * b * math.sqrt(xi) / a0)
        return max(pref / math.sqrt(xi) * g, 0.0)

    if np.isscalar(x):
        return one(float(x))
    return np.array([one(float(xi)) for xi in np.asarray(x).ravel()]).reshape(
        np.shape(x)
    )


def pdf_gamma_clt(x, m: float, delta2: float, gamma_bar: float):
    """Gaussian (CLT) density of the aggregate SNR gamma = gamma_bar * Z."""
    if not delta2 > 0:
        raise DomainError("delta2 must be positive")
    if not gamma_bar > 0:
        raise DomainError("gamma_bar must be positive")
    x = np.asarray(x, dtype=float)
    out = np.exp(-((x - gamma_bar * m) ** 2) / (2.0 * gamma_bar ** 2 * delta2)) / (
        math.sqrt(2.0 * math.pi * delta2) * gamma_bar
    )
    return float(out) if out.ndim == 0 else out
