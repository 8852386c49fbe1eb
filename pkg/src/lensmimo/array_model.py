"""Lens array geometry and per-terminal array responses.

The array places M elements on the focal arc of an electromagnetic lens.
Element m sits at normalized spatial frequency theta_tilde = m / d_tilde,
and the response of element m to a plane wave arriving with spatial
frequency phi_tilde (the sine of the azimuth DOA) is

    a_m(phi_tilde) = exp(-j * phi0) * sqrt(A) * sinc(m - d_tilde * phi_tilde)

where A = d_tilde * a_z is the normalized aperture. In the normalized sinc
convention the response is one-hot whenever d_tilde * phi_tilde hits an
integer, which is what makes the beamspace picture exact on the grid.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

# Inputs within this distance of an integer beam coordinate are treated as
# exactly on the grid, so grid orthogonality holds exactly in floating point.
GRID_SNAP_TOL = 1e-9

# Below this argument magnitude sinc is evaluated by series, not sin(x)/x.
_SERIES_CUTOFF = 1e-8


class SincConvention(enum.Enum):
    NORMALIZED = "normalized"
    UNNORMALIZED = "unnormalized"


def derive_element_count(d_tilde: float) -> int:
    """Largest odd element count M with every theta_tilde = m/d_tilde in [-1, 1].

    Returns 1 + 2*floor(d_tilde), which is odd by construction and never
    places an element beyond the end-fire directions.
    """
    if d_tilde <= 0:
        raise ValueError(f"d_tilde must be positive, got {d_tilde}")
    return 1 + 2 * math.floor(d_tilde)


@dataclass(frozen=True)
class LensArrayConfig:
    """Normalized lens dimensions and response conventions.

    d_tilde is the azimuth lens dimension over the carrier wavelength and
    a_z the vertical one, so the aperture gain is A = d_tilde * a_z.
    element_count defaults to the largest valid odd M for the given
    d_tilde; an explicit override is validated against the placement
    constraint (element_count - 1) / 2 <= d_tilde.
    """

    d_tilde: float
    a_z: float = 1.0
    element_count: int = None
    focal_length: float = 1.0
    phi0: float = 0.0
    sinc_convention: SincConvention = SincConvention.NORMALIZED

    def __post_init__(self):
        if self.d_tilde <= 0:
            raise ValueError(f"d_tilde must be positive, got {self.d_tilde}")
        if self.a_z <= 0:
            raise ValueError(f"a_z must be positive, got {self.a_z}")
        if self.focal_length <= 0:
            raise ValueError(f"focal_length must be positive, got {self.focal_length}")
        if self.element_count is None:
            object.__setattr__(self, "element_count", derive_element_count(self.d_tilde))
        m = self.element_count
        if not isinstance(m, int) or m < 1 or m % 2 == 0:
            raise ValueError(f"element_count must be an odd positive integer, got {m}")
        if (m - 1) / 2 > self.d_tilde:
            raise ValueError(
                f"element_count {m} places elements beyond end-fire for d_tilde {self.d_tilde}"
            )
        if not isinstance(self.sinc_convention, SincConvention):
            raise ValueError(f"unknown sinc convention {self.sinc_convention!r}")

    @classmethod
    def from_physical(cls, d_y: float, d_z: float, wavelength: float, **kwargs) -> "LensArrayConfig":
        """Build a config from raw apertures and wavelength in common units."""
        if wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {wavelength}")
        return cls(d_tilde=d_y / wavelength, a_z=d_z / wavelength, **kwargs)

    @property
    def aperture(self) -> float:
        """Normalized aperture A = d_tilde * a_z."""
        return self.d_tilde * self.a_z

    @property
    def max_index(self) -> int:
        return (self.element_count - 1) // 2


@dataclass(frozen=True)
class ElementPlacement:
    index: int
    theta_tilde: float
    theta: float
    position: tuple


@dataclass(frozen=True)
class ChannelVector:
    """M complex element responses for one terminal, ascending element index."""

    entries: np.ndarray
    source_spatial_freq: float

    def __len__(self):
        return len(self.entries)


def element_indices(config: LensArrayConfig) -> np.ndarray:
    """Signed element indices {0, +-1, ..., +-(M-1)/2} in ascending order."""
    k = config.max_index
    return np.arange(-k, k + 1)


def element_placements(config: LensArrayConfig) -> list:
    """All element placements on the focal arc, ascending index.

    Element m sits at theta_tilde = m / d_tilde on the arc of radius
    focal_length, at (F cos theta, -F sin theta, 0) with theta the
    physical angle arcsin(theta_tilde).
    """
    out = []
    f = config.focal_length
    for m in element_indices(config):
        tt = m / config.d_tilde
        theta = math.asin(tt)
        pos = (f * math.cos(theta), -f * math.sin(theta), 0.0)
        out.append(ElementPlacement(index=int(m), theta_tilde=tt, theta=theta, position=pos))
    return out


def sinc(x: float, convention: SincConvention = SincConvention.NORMALIZED) -> float:
    """Cardinal sine under the requested convention.

    Normalized: sin(pi x)/(pi x), unit at 0, zeros exactly at nonzero
    integers. Unnormalized: sin(x)/x. Arguments near the removable
    singularity use the two-term series 1 - u^2/6 to avoid 0/0.
    """
    if convention is SincConvention.NORMALIZED:
        n = round(x)
        if x == n:
            return 1.0 if n == 0 else 0.0
        u = math.pi * x
    else:
        u = x
    if abs(u) < _SERIES_CUTOFF:
        return 1.0 - u * u / 6.0
    return math.sin(u) / u


def snap_to_grid(t, tol: float = GRID_SNAP_TOL):
    """Snap beam coordinates t = d_tilde * phi_tilde to nearby integers.

    Keeps responses exactly one-hot for inputs that are grid points up to
    floating-point representation of the intended value.
    """
    t = np.asarray(t, dtype=float)
    n = np.round(t)
    snapped = np.where(np.abs(t - n) < tol, n, t)
    if snapped.ndim == 0:
        return float(snapped)
    return snapped


def _sinc_array(x: np.ndarray, convention: SincConvention) -> np.ndarray:
    if convention is SincConvention.NORMALIZED:
        r = np.sinc(x)
        n = np.round(x)
        exact = x == n
        if np.any(exact):
            r = np.where(exact, np.where(x == 0.0, 1.0, 0.0), r)
        return r
    small = np.abs(x) < _SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(xs) / xs)


def _validate_spatial_freq(phi_tilde) -> None:
    bad = np.abs(np.asarray(phi_tilde)) > 1.0
    if np.any(bad):
        raise ValueError("spatial frequency magnitude exceeds 1")


def _profile_matrix(config: LensArrayConfig, spatial_freqs) -> np.ndarray:
    """Real sinc profiles sinc(m - d_tilde * phi_tilde) for a batch of terminals.

    Output shape is spatial_freqs.shape + (M,). Beam coordinates are snapped
    to the grid in the normalized convention before evaluation.
    """
    sf = np.asarray(spatial_freqs, dtype=float)
    _validate_spatial_freq(sf)
    t = config.d_tilde * sf
    if config.sinc_convention is SincConvention.NORMALIZED:
        t = np.asarray(snap_to_grid(t))
    m = element_indices(config).astype(float)
    return _sinc_array(m - t[..., None], config.sinc_convention)


def array_response(config: LensArrayConfig, spatial_freq: float) -> ChannelVector:
    """Array response vector of one terminal at the given spatial frequency.

    Entry m equals exp(-j phi0) * sqrt(A) * sinc(m - d_tilde * spatial_freq).
    Under maximum-ratio combining this same vector serves as the combiner
    for the terminal it belongs to.
    """
    _validate_spatial_freq(spatial_freq)
    prof = _profile_matrix(config, float(spatial_freq))
    scale = math.sqrt(config.aperture)
    phase = complex(math.cos(config.phi0), -math.sin(config.phi0))
    entries = (scale * phase) * prof.astype(complex)
    entries.setflags(write=False)
    return ChannelVector(entries=entries, source_spatial_freq=float(spatial_freq))
