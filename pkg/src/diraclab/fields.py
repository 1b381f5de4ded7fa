"""Periodic grid, spinor fields, unitary FFTs, dealiasing, and snapshot I/O.

The frequency lattice is xi_k = 2*pi*k/L with integer indices k in
[-n/2, n/2) per axis, stored in FFT (unshifted) order.  Transforms use the
unitary normalization so the l2 norm agrees in both representations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import spinor_dim

PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class Grid:
    """Periodic torus [0, L)^d sampled on n points per axis (n a power of two)."""

    dim: int
    n: int
    box_length: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"unsupported spatial dimension d={self.dim}")
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n={self.n} must be a power of two >= 4")
        if self.box_length <= 0:
            raise ValueError("box_length must be positive")

    @property
    def spacing(self):
        return self.box_length / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def spinor_dim(self):
        return spinor_dim(self.dim)

    def k_axis(self):
        """Integer mode numbers along one axis, FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    def freq_axis(self):
        """Frequencies xi = 2*pi*k/L along one axis, FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def freq_grids(self):
        """List of d broadcastable arrays with xi_j on the full lattice."""
        ax = self.freq_axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True)

    def freq_norm(self):
        """|xi| on the full lattice."""
        grids = self.freq_grids()
        return np.sqrt(sum(g**2 for g in grids))

    def dealias_mask(self):
        """Boolean mask keeping modes with every |k_axis| <= n/4 (1/2 rule)."""
        k = self.k_axis()
        keep1d = np.abs(k) <= self.n // 4
        mask = keep1d
        for _ in range(self.dim - 1):
            mask = np.logical_and.outer(mask, keep1d)
        return mask

    def dealiased_freq_max(self):
        """Largest |xi| among the modes kept by the dealias mask."""
        return float(np.max(self.freq_norm()[self.dealias_mask()]))


class SpinorField:
    """Complex spinor-valued field on a Grid, in physical or frequency representation.

    data has shape (N_d, n, ..., n); mutable single-owner buffer.
    """

    def __init__(self, grid, data, repr):
        data = np.asarray(data, dtype=complex)
        expected = (grid.spinor_dim,) + grid.shape
        if data.shape != expected:
            raise ValueError(f"data shape {data.shape} does not match {expected}")
        if repr not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown representation {repr!r}")
        self.grid = grid
        self.data = data
        self.repr = repr

    @classmethod
    def zeros(cls, grid, repr=PHYSICAL):
        return cls(grid, np.zeros((grid.spinor_dim,) + grid.shape, dtype=complex), repr)

    def copy(self):
        return SpinorField(self.grid, self.data.copy(), self.repr)

    def spatial_axes(self):
        return tuple(range(1, self.grid.dim + 1))

    def l2_norm(self):
        """l2 norm over grid points and components; equal in both representations."""
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2)))

    def __add__(self, other):
        self._check_compatible(other)
        return SpinorField(self.grid, self.data + other.data, self.repr)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpinorField(self.grid, self.data - other.data, self.repr)

    def __mul__(self, scalar):
        return SpinorField(self.grid, self.data * scalar, self.repr)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if self.grid != other.grid or self.repr != other.repr:
            raise ValueError("fields live on different grids or representations")


def to_frequency(f):
    """Unitary forward DFT, componentwise (physical -> frequency)."""
    if f.repr != PHYSICAL:
        raise ValueError("to_frequency expects a physical-representation field")
    data = np.fft.fftn(f.data, axes=f.spatial_axes(), norm="ortho")
    return SpinorField(f.grid, data, FREQUENCY)


def to_physical(f):
    """Unitary inverse DFT, componentwise (frequency -> physical)."""
    if f.repr != FREQUENCY:
        raise ValueError("to_physical expects a frequency-representation field")
    data = np.fft.ifftn(f.data, axes=f.spatial_axes(), norm="ortho")
    return SpinorField(f.grid, data, PHYSICAL)


def dealias_cubic(f):
    """Zero all modes with any |k_axis| > n/4 (exact alias removal for cubic terms)."""
    if f.repr != FREQUENCY:
        raise ValueError("dealias_cubic expects a frequency-representation field")
    out = f.copy()
    out.data *= f.grid.dealias_mask()
    return out


def plane_wave(grid, k_indices, component=0, amplitude=1.0):
    """Frequency-representation field with a single unit coefficient at lattice mode k."""
    f = SpinorField.zeros(grid, FREQUENCY)
    idx = tuple(int(k) % grid.n for k in k_indices)
    f.data[(component,) + idx] = amplitude
    return f


def random_field(grid, seed, repr=FREQUENCY, mask=None):
    """Gaussian random field, optionally restricted to a frequency mask."""
    rng = np.random.default_rng(seed)
    shape = (grid.spinor_dim,) + grid.shape
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    f = SpinorField(grid, data, repr)
    if mask is not None:
        if repr != FREQUENCY:
            raise ValueError("mask restriction requires frequency representation")
        f.data *= mask
    return f


def save_snapshot(f, path):
    """Write a field as CSV rows (k-indices..., component, re, im) with a header."""
    grid = f.grid
    with open(path, "w") as fh:
        fh.write(f"# dim = {grid.dim}\n")
        fh.write(f"# n = {grid.n}\n")
        fh.write(f"# box_length = {format(grid.box_length, '.17g')}\n")
        fh.write(f"# repr = {f.repr}\n")
        axis_names = ",".join(f"k{j}" for j in range(1, grid.dim + 1))
        fh.write(f"{axis_names},component,re,im\n")
        k = grid.k_axis()
        grids = np.meshgrid(*([k] * grid.dim), indexing="ij")
        flat_idx = [g.ravel() for g in grids]
        for comp in range(grid.spinor_dim):
            vals = f.data[comp].ravel()
            for row in range(vals.size):
                ks = ",".join(str(int(g[row])) for g in flat_idx)
                re = format(float(vals[row].real), ".17g")
                im = format(float(vals[row].imag), ".17g")
                fh.write(f"{ks},{comp},{re},{im}\n")


def load_snapshot(path):
    """Read a field written by save_snapshot."""
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                header[key.strip()] = value.strip()
            elif line[0].isalpha() or line.startswith("k"):
                continue  # column header
            else:
                rows.append(line.split(","))
    grid = Grid(dim=int(header["dim"]), n=int(header["n"]), box_length=float(header["box_length"]))
    f = SpinorField.zeros(grid, header["repr"])
    d = grid.dim
    for parts in rows:
        ks = tuple(int(p) % grid.n for p in parts[:d])
        comp = int(parts[d])
        f.data[(comp,) + ks] = float(parts[d + 1]) + 1j * float(parts[d + 2])
    return f
