"""Pairwise and aggregate LOS interference under maximum-ratio combining.

With unit transmit power and MRC, the interference terminal k exerts on
terminal l depends only on the two spatial frequencies:

    I(l, k) = (1/M) * | h_l^H h_k |^2
            = (1/M) * ( sum_m A sinc(m - t_l) sinc(m - t_k) )^2

with t = d_tilde * phi_tilde the beam coordinates. The module provides the
direct inner-product evaluation, an algebraically equivalent closed form
obtained by rewriting each sinc product through the identity
sin(x)sin(y) = [cos(x-y) - cos(x+y)]/2, the mainlobe-gated "effective"
interference, and pattern metrics (nulls, sidelobe ratio) of the
interference sweep.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .array_model import (
    LensArrayConfig,
    SincConvention,
    _profile_matrix,
    _sinc_array,
    _validate_spatial_freq,
    array_response,
    element_indices,
    snap_to_grid,
)

# Closed-form denominators smaller than this fall back to the direct
# sinc product for that term; the closed form is an identity elsewhere.
SINGULARITY_THRESHOLD = 1e-9

# Powers are clamped here before dB conversion so emitted series stay finite.
DB_FLOOR = 1e-300

# Null search requires the desired user on the beam grid within this slack.
GRID_TOL_FOR_NULLS = 1e-9


class NullNotFoundError(RuntimeError):
    """Raised when a pattern null cannot be located in the search range."""


@dataclass(frozen=True)
class AngularPair:
    """Two spatial frequencies plus their derived separations.

    delta is the spatial-frequency separation, delta_sum the sum, and
    theta_norm = d_tilde * delta the mainlobe-normalized separation used by
    the effective-interference gate |theta_norm| <= 1.
    """

    phi_tilde_l: float
    phi_tilde_k: float
    delta: float
    delta_sum: float
    theta_norm: float
    theta_sum_norm: float

    @classmethod
    def from_freqs(cls, config: LensArrayConfig, phi_tilde_l: float, phi_tilde_k: float):
        _validate_spatial_freq([phi_tilde_l, phi_tilde_k])
        delta = phi_tilde_l - phi_tilde_k
        delta_sum = phi_tilde_l + phi_tilde_k
        return cls(
            phi_tilde_l=float(phi_tilde_l),
            phi_tilde_k=float(phi_tilde_k),
            delta=delta,
            delta_sum=delta_sum,
            theta_norm=config.d_tilde * delta,
            theta_sum_norm=config.d_tilde * delta_sum,
        )


@dataclass(frozen=True)
class InterferenceSample:
    pair: AngularPair
    power_linear: float
    power_db: float
    effective: bool


@dataclass(frozen=True)
class PatternSeries:
    """Interference sweep over angular separation at a fixed desired user."""

    phi_tilde_l: float
    deltas: np.ndarray
    theta_norms: np.ndarray
    powers_linear: np.ndarray
    powers_db: np.ndarray
    effective: np.ndarray
    config: LensArrayConfig
    skipped_count: int

    def __len__(self):
        return len(self.deltas)

    def as_samples(self) -> list:
        out = []
        for i in range(len(self.deltas)):
            pair = AngularPair.from_freqs(
                self.config, self.phi_tilde_l, self.phi_tilde_l - self.deltas[i]
            )
            out.append(
                InterferenceSample(
                    pair=pair,
                    power_linear=float(self.powers_linear[i]),
                    power_db=float(self.powers_db[i]),
                    effective=bool(self.effective[i]),
                )
            )
        return out


def power_to_db(power_linear) -> float:
    """10 log10 of power, clamped at a tiny floor so exact zeros stay finite."""
    p = np.maximum(np.asarray(power_linear, dtype=float), DB_FLOOR)
    out = 10.0 * np.log10(p)
    if out.ndim == 0:
        return float(out)
    return out


def _beam_coords(config: LensArrayConfig, spatial_freqs) -> np.ndarray:
    sf = np.asarray(spatial_freqs, dtype=float)
    _validate_spatial_freq(sf)
    t = config.d_tilde * sf
    if config.sinc_convention is SincConvention.NORMALIZED:
        t = np.asarray(snap_to_grid(t))
    return t


def _direct_powers(config: LensArrayConfig, sf_l, sf_k) -> np.ndarray:
    """Inner-product interference for broadcastable batches of pairs."""
    prof_l = _profile_matrix(config, sf_l)
    prof_k = _profile_matrix(config, sf_k)
    dots = np.sum(prof_l * prof_k, axis=-1)
    a = config.aperture
    return (a * a / config.element_count) * dots * dots


def _closed_powers(config: LensArrayConfig, sf_l, sf_k) -> np.ndarray:
    """Closed-form interference for broadcastable batches of pairs.

    Per element m the summand A sinc(m - t_l) sinc(m - t_k) is rewritten as
    N_m / D_m with

        N_m = (A/2) [cos(c (t_l - t_k)) - cos(c (2m - t_l - t_k))]
        D_m = c^2 (m - t_l)(m - t_k)

    where c = pi in the normalized convention and c = 1 otherwise. The
    denominator factors as m(m - (t_l + t_k)) + t_l t_k; the factored
    grouping is used because it stays accurate near the sinc zeros. Terms
    with |D_m| below the singularity threshold are evaluated directly.
    """
    t_l = _beam_coords(config, sf_l)[..., None]
    t_k = _beam_coords(config, sf_k)[..., None]
    m = element_indices(config).astype(float)
    c = math.pi if config.sinc_convention is SincConvention.NORMALIZED else 1.0
    a = config.aperture

    num = 0.5 * a * (np.cos(c * (t_l - t_k)) - np.cos(c * (2.0 * m - t_l - t_k)))
    den = (c * c) * (m - t_l) * (m - t_k)

    near_zero = np.abs(den) < SINGULARITY_THRESHOLD
    den_safe = np.where(near_zero, 1.0, den)
    terms = num / den_safe
    if np.any(near_zero):
        direct = a * _sinc_array(m - t_l, config.sinc_convention) * _sinc_array(
            m - t_k, config.sinc_convention
        )
        terms = np.where(near_zero, direct, terms)

    s = terms.sum(axis=-1)
    return s * s / config.element_count


def pairwise_interference_direct(
    config: LensArrayConfig, phi_tilde_l: float, phi_tilde_k: float
) -> float:
    """Interference via explicit channel vectors and a Hermitian inner product.

    The common phase cancels in h_l^H h_k, so the result does not depend
    on phi0.
    """
    h_l = array_response(config, phi_tilde_l)
    h_k = array_response(config, phi_tilde_k)
    inner = np.vdot(h_l.entries, h_k.entries)
    return float(abs(inner) ** 2 / config.element_count)


def pairwise_interference_closed(
    config: LensArrayConfig, phi_tilde_l: float, phi_tilde_k: float
) -> float:
    """Closed-form interference, identical to the direct path to rounding."""
    return float(_closed_powers(config, float(phi_tilde_l), float(phi_tilde_k)))


def effective_interference(
    config: LensArrayConfig, phi_tilde_l: float, phi_tilde_k: float
) -> InterferenceSample:
    """Mainlobe-gated interference: full power iff |theta_norm| <= 1, else 0.

    Interferers outside the mainlobe contribute only sidelobe power, which
    the effective approximation discards entirely.
    """
    pair = AngularPair.from_freqs(config, phi_tilde_l, phi_tilde_k)
    if abs(pair.theta_norm) <= 1.0:
        power = pairwise_interference_closed(config, phi_tilde_l, phi_tilde_k)
        eff = True
    else:
        power = 0.0
        eff = False
    return InterferenceSample(
        pair=pair, power_linear=power, power_db=power_to_db(power), effective=eff
    )


def user_total_interference(config: LensArrayConfig, index_l: int, spatial_freqs) -> float:
    """Total interference on user index_l from every other user in the drop."""
    sf = np.asarray(spatial_freqs, dtype=float)
    if sf.ndim != 1 or sf.size == 0:
        raise ValueError("spatial_freqs must be a non-empty 1-D sequence")
    if not 0 <= index_l < sf.size:
        raise ValueError(f"index_l {index_l} out of range for {sf.size} users")
    others = np.delete(sf, index_l)
    if others.size == 0:
        return 0.0
    powers = _closed_powers(config, np.full(others.shape, sf[index_l]), others)
    return float(powers.sum())


def sweep_pattern(config: LensArrayConfig, phi_tilde_l: float, delta_grid) -> PatternSeries:
    """Interference pattern versus angular separation delta = phi_l - phi_k.

    Grid points whose interferer frequency phi_tilde_l - delta falls outside
    [-1, 1] are skipped and counted in skipped_count.
    """
    _validate_spatial_freq(phi_tilde_l)
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.size == 0:
        raise ValueError("delta grid must be non-empty")
    if deltas.size > 1 and not np.all(np.diff(deltas) > 0):
        raise ValueError("delta grid must be strictly increasing")
    sf_k = phi_tilde_l - deltas
    keep = np.abs(sf_k) <= 1.0
    deltas = deltas[keep]
    if deltas.size == 0:
        raise ValueError("no delta grid point keeps the interferer in range")
    powers = _closed_powers(config, np.full(deltas.shape, float(phi_tilde_l)), sf_k[keep])
    theta = config.d_tilde * deltas
    series = PatternSeries(
        phi_tilde_l=float(phi_tilde_l),
        deltas=deltas,
        theta_norms=theta,
        powers_linear=powers,
        powers_db=power_to_db(powers),
        effective=np.abs(theta) <= 1.0,
        config=config,
        skipped_count=int(np.count_nonzero(~keep)),
    )
    return series


def _correlation(config: LensArrayConfig, phi_tilde_l: float, deltas) -> np.ndarray:
    # Signed channel correlation; its sign changes locate pattern nulls,
    # which are touching zeros of the squared pattern.
    prof_l = _profile_matrix(config, float(phi_tilde_l))
    sf_k = float(phi_tilde_l) - np.asarray(deltas, dtype=float)
    prof_k = _profile_matrix(config, sf_k)
    return prof_k @ prof_l


def _null_brackets(config: LensArrayConfig, phi_tilde_l: float, count: int) -> list:
    delta_max = min(2.0, 1.0 + float(phi_tilde_l))
    if delta_max <= 0:
        raise NullNotFoundError("no admissible separation range on this side")
    n_scan = max(2001, 200 * int(math.ceil(config.d_tilde)))
    grid = np.linspace(delta_max / n_scan, delta_max, n_scan)
    corr = _correlation(config, phi_tilde_l, grid)
    nulls = []
    for i in range(len(grid) - 1):
        if corr[i] == 0.0:
            nulls.append((grid[i], grid[i]))
        elif corr[i] * corr[i + 1] < 0.0:
            nulls.append((grid[i], grid[i + 1]))
        if len(nulls) >= count:
            return nulls
    raise NullNotFoundError(
        f"found {len(nulls)} nulls within delta <= {delta_max}, needed {count}"
    )


def _refine_null(config: LensArrayConfig, phi_tilde_l: float, bracket) -> float:
    lo, hi = bracket
    if lo == hi:
        return float(lo)
    f = lambda d: float(_correlation(config, phi_tilde_l, d))
    return float(optimize.brentq(f, lo, hi, xtol=1e-14))


def first_null(config: LensArrayConfig, phi_tilde_l: float) -> float:
    """Smallest positive separation where the pattern power vanishes.

    Requires phi_tilde_l on the beam grid, where exact nulls exist under
    the normalized convention; located by bisection on the signed channel
    correlation. For a broadside user the null sits at 1/d_tilde.
    """
    t = config.d_tilde * float(phi_tilde_l)
    if abs(t - round(t)) > GRID_TOL_FOR_NULLS:
        raise ValueError("phi_tilde_l must be a beam grid point m/d_tilde")
    bracket = _null_brackets(config, phi_tilde_l, 1)[0]
    return _refine_null(config, phi_tilde_l, bracket)


def sidelobe_ratio_db(config: LensArrayConfig) -> float:
    """Peak-to-first-sidelobe power ratio in dB for a broadside user.

    The first sidelobe is the pattern maximum between the first two nulls;
    for sinc-type patterns the ratio is near 13 dB regardless of aperture.
    """
    if config.element_count < 11:
        raise ValueError("element_count must be at least 11 to resolve a sidelobe")
    brackets = _null_brackets(config, 0.0, 2)
    n1 = _refine_null(config, 0.0, brackets[0])
    n2 = _refine_null(config, 0.0, brackets[1])
    peak = float(_direct_powers(config, 0.0, 0.0))

    neg_power = lambda d: -float(_direct_powers(config, 0.0, float(d)))
    res = optimize.minimize_scalar(
        neg_power, bounds=(n1, n2), method="bounded", options={"xatol": 1e-12}
    )
    side = -res.fun
    if side <= 0:
        raise NullNotFoundError("no sidelobe peak found between the first two nulls")
    return 10.0 * math.log10(peak / side)
