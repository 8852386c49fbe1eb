"""Distributions induced by uniform sector drops of user terminals.

DOAs are i.i.d. uniform on [-half_width, half_width] (a 2*pi/3 sector by
default). The spatial frequency y = sin(phi) then has the arcsine-type
density 1/(2 h sqrt(1 - y^2)) on |y| <= sin(h), and the normalized
separation Theta = d_tilde * (sin phi_l - sin phi_k) of an interferer pair
has the convolution density implemented by theta_pdf. The probability that
an interferer is effective, P(|Theta| <= 1), is available three ways:
adaptive quadrature of theta_pdf, a first-order closed form valid for
large arrays, and Monte Carlo with deterministic parallel streams.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""


@dataclass(frozen=True)
class SectorModel:
    """Angular sector from which DOAs are drawn uniformly."""

    half_width: float = math.pi / 3.0

    def __post_init__(self):
        if not 0.0 < self.half_width <= math.pi / 2.0:
            raise ValueError(f"half_width must lie in (0, pi/2], got {self.half_width}")

    @property
    def max_spatial_freq(self) -> float:
        return math.sin(self.half_width)


DEFAULT_SECTOR = SectorModel()


@dataclass(frozen=True)
class ProbEstimate:
    value: float
    std_error: float
    sample_count: int
    seed: int


def _unit_stream(seed: int, offset: int, count: int) -> np.ndarray:
    """Doubles [offset, offset + count) of the uniform stream keyed by seed.

    Philox is counter based: one 128-bit block yields four doubles, so an
    arbitrary offset is reached by advancing whole blocks and discarding
    the in-block remainder. Disjoint ranges therefore reproduce the serial
    sequence exactly, whatever the partitioning.
    """
    bitgen = Philox(key=seed)
    skip, rem = divmod(offset, 4)
    if skip:
        bitgen.advance(skip)
    gen = Generator(bitgen)
    if rem:
        gen.random(rem)
    return gen.random(count)


def sample_doas(seed: int, count: int, offset: int = 0, sector: SectorModel = DEFAULT_SECTOR) -> np.ndarray:
    """I.i.d. uniform DOAs in radians; draw i is a pure function of (seed, i)."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    u = _unit_stream(seed, offset, count)
    h = sector.half_width
    return (2.0 * u - 1.0) * h


def spatial_freq_pdf(y, sector: SectorModel = DEFAULT_SECTOR):
    """Density of sin(phi) for phi uniform on the sector.

    Equals 1/(2 h sqrt(1 - y^2)) on |y| <= sin(h) and 0 outside; for the
    default sector the constant is 3/(2 pi).
    """
    y = np.asarray(y, dtype=float)
    s = sector.max_spatial_freq
    inside = np.abs(y) <= s
    ysafe = np.where(inside, y, 0.0)
    val = np.where(inside, 1.0 / (2.0 * sector.half_width * np.sqrt(1.0 - ysafe * ysafe)), 0.0)
    if val.ndim == 0:
        return float(val)
    return val


def theta_pdf(z: float, d_tilde: float, sector: SectorModel = DEFAULT_SECTOR) -> float:
    """Density of Theta = d_tilde * (sin phi_l - sin phi_k) at z.

    With w = z/d_tilde this is the self-convolution of the spatial-frequency
    density evaluated at separation w:

        f(z) = 1/(d_tilde (2h)^2) * integral over y in [y_L, y_U] of
               dy / ( sqrt(1 - (y + w)^2) sqrt(1 - y^2) )

    with y_L = max(-s, -s - w), y_U = min(s, s - w), s = sin(h). The
    substitution y = sin(t) removes the inverse-square-root endpoint
    singularities before adaptive quadrature. Support is |z| <= 2 s d_tilde.
    """
    if d_tilde <= 0:
        raise ValueError(f"d_tilde must be positive, got {d_tilde}")
    s = sector.max_spatial_freq
    w = z / d_tilde
    y_lo = max(-s, -s - w)
    y_hi = min(s, s - w)
    if y_lo >= y_hi:
        return 0.0

    def integrand(t):
        u = math.sin(t) + w
        return 1.0 / math.sqrt(1.0 - u * u)

    val, err = integrate.quad(
        integrand, math.asin(y_lo), math.asin(y_hi), epsabs=1e-10, limit=200
    )
    if err > 1e-6 * max(1.0, abs(val)):
        raise QuadratureError(f"inner quadrature reached only {err:.3e}")
    h2 = 2.0 * sector.half_width
    return val / (d_tilde * h2 * h2)


def effective_prob_quadrature(d_tilde: float, sector: SectorModel = DEFAULT_SECTOR) -> float:
    """P(|Theta| <= 1) by integrating theta_pdf over [-1, 1].

    The density is even, so the integral runs over [0, min(1, support edge)]
    and is doubled; this also keeps the corner of the density at z = 0 off
    the interior of the quadrature interval.
    """
    if d_tilde <= 0:
        raise ValueError(f"d_tilde must be positive, got {d_tilde}")
    edge = 2.0 * sector.max_spatial_freq * d_tilde
    upper = min(1.0, edge)
    val, err = integrate.quad(
        lambda z: theta_pdf(z, d_tilde, sector), 0.0, upper, epsabs=1e-8, limit=200
    )
    if err > 1e-6:
        raise QuadratureError(f"outer quadrature reached only {err:.3e}")
    return min(1.0, 2.0 * val)


def effective_prob_closed(d_tilde: float, sector: SectorModel = DEFAULT_SECTOR) -> float:
    """First-order closed form artanh(sin h) / (h^2 d_tilde), clamped to 1.

    For the default sector this is 9 artanh(sqrt(3)/2) / (pi^2 d_tilde).
    The expansion assumes a large array, so d_tilde < 2 is rejected.
    """
    if d_tilde < 2.0:
        raise ValueError(
            f"closed form requires d_tilde >= 2 (large-array regime), got {d_tilde}"
        )
    h = sector.half_width
    return min(1.0, math.atanh(sector.max_spatial_freq) / (h * h * d_tilde))


def _count_effective(d_tilde: float, seed: int, start: int, stop: int, half_width: float) -> int:
    u = _unit_stream(seed, 2 * start, 2 * (stop - start)).reshape(-1, 2)
    phi = (2.0 * u - 1.0) * half_width
    theta = d_tilde * (np.sin(phi[:, 0]) - np.sin(phi[:, 1]))
    return int(np.count_nonzero(np.abs(theta) <= 1.0))


def effective_prob_mc(
    d_tilde: float,
    sample_count: int,
    seed: int,
    threads: int = 1,
    sector: SectorModel = DEFAULT_SECTOR,
) -> ProbEstimate:
    """Monte Carlo estimate of P(|Theta| <= 1) with binomial standard error.

    Pair i consumes stream doubles 2i and 2i+1, so the result is a pure
    function of (seed, sample_count) and does not depend on how the index
    range is partitioned across workers.
    """
    if d_tilde <= 0:
        raise ValueError(f"d_tilde must be positive, got {d_tilde}")
    if sample_count < 1:
        raise ValueError(f"sample_count must be positive, got {sample_count}")
    threads = max(1, int(threads))
    h = sector.half_width

    chunk = max(1, min(sample_count, 1 << 18))
    ranges = [(a, min(a + chunk, sample_count)) for a in range(0, sample_count, chunk)]
    if threads == 1 or len(ranges) == 1:
        hits = sum(_count_effective(d_tilde, seed, a, b, h) for a, b in ranges)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_count_effective, d_tilde, seed, a, b, h) for a, b in ranges]
            hits = sum(f.result() for f in futs)

    value = hits / sample_count
    std_error = math.sqrt(value * (1.0 - value) / sample_count)
    return ProbEstimate(value=value, std_error=std_error, sample_count=sample_count, seed=seed)
