"""Grid-sampled vector fields on periodic boxes and flat-wall slabs.

All discrete differential operators are second-order accurate: centered
differences along periodic axes, one-sided second-order stencils on the two
faces of the (single) wall axis.  The gradient convention is fixed once for
the whole toolkit as ``(grad d)[i, j] = d_j d_i`` (component index first,
derivative index second); every transpose elsewhere follows from that single
choice.

The Leray projection removes the discrete-gradient part of a velocity field.
On periodic boxes it is evaluated in Fourier space with the *centered
difference* symbol ``kappa_j = sin(k_j h_j)/h_j``, which makes the projected
field's discrete divergence vanish to machine precision (modes annihilated by
the centered stencil carry no discrete divergence to begin with).  On slabs
the wall axis uses cosine modes for the pressure and sine modes for the
normal velocity component, again matched to the centered stencil, so the
interior divergence is removed exactly and wall values are untouched.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.fft import dct, fftn, idct, idst, ifftn


def fft_workers() -> int:
    """Worker count for batched transforms, from NEMATIC_KIT_THREADS."""
    try:
        return max(1, int(os.environ.get("NEMATIC_KIT_THREADS", "1")))
    except ValueError:
        return 1

__all__ = [
    "Grid",
    "VectorField",
    "DirectorField",
    "VelocityField",
    "TensorField",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "scalar_gradient",
    "scalar_laplacian",
    "leray_project",
    "cross",
    "dot",
    "write_snapshot",
    "read_snapshot",
    "export_csv",
    "PoissonConvergenceError",
]

Topology = Literal["periodic", "wall"]

_MAGIC = b"NLCK1"


class PoissonConvergenceError(RuntimeError):
    """Projection solve failed; carries the offending residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Grid:
    """Structured 3-d grid: per-axis cell counts, spacings and topology.

    Periodic axes sample ``x_i = i*h`` with wrap-around length ``N*h``;
    a wall axis samples nodes including both faces, ``x_i = i*h`` with the
    walls at ``x_0`` and ``x_{N-1}``.  At most one wall axis is allowed
    (the slab normal).
    """

    extents: tuple[int, int, int]
    spacing: tuple[float, float, float]
    topology: tuple[Topology, Topology, Topology] = ("periodic", "periodic", "periodic")

    def __post_init__(self):
        extents = tuple(int(n) for n in self.extents)
        spacing = tuple(float(h) for h in self.spacing)
        topology = tuple(self.topology)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "topology", topology)
        if len(extents) != 3 or len(spacing) != 3 or len(topology) != 3:
            raise ValueError("grid needs exactly three axes")
        if any(n < 4 for n in extents):
            raise ValueError(f"extents must be >= 4 per axis (stencil width), got {extents}")
        if any(h <= 0 for h in spacing):
            raise ValueError(f"spacing must be positive, got {spacing}")
        if any(t not in ("periodic", "wall") for t in topology):
            raise ValueError(f"unknown topology in {topology}")
        if sum(t == "wall" for t in topology) > 1:
            raise ValueError("at most one wall axis is allowed")

    @classmethod
    def periodic(cls, n: int, length: float = 2.0 * np.pi) -> "Grid":
        h = length / n
        return cls((n, n, n), (h, h, h))

    @classmethod
    def slab(cls, n: int, wall_axis: int = 2, length: float = 2.0 * np.pi) -> "Grid":
        topology = ["periodic", "periodic", "periodic"]
        topology[wall_axis] = "wall"
        spacing = [length / n] * 3
        spacing[wall_axis] = length / (n - 1)
        return cls((n, n, n), tuple(spacing), tuple(topology))  # type: ignore[arg-type]

    @property
    def wall_axis(self) -> int | None:
        for ax, t in enumerate(self.topology):
            if t == "wall":
                return ax
        return None

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.spacing[axis] * np.arange(self.extents[axis])

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*(self.axis_coordinates(a) for a in range(3)), indexing="ij")

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def interior_slices(self) -> tuple[slice, slice, slice]:
        """Slices excluding wall faces (everything, on fully periodic grids)."""
        sl = [slice(None)] * 3
        ax = self.wall_axis
        if ax is not None:
            sl[ax] = slice(1, -1)
        return tuple(sl)


def _check_values(values: np.ndarray, grid: Grid, trailing: tuple[int, ...]) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != grid.extents + trailing:
        raise ValueError(f"expected shape {grid.extents + trailing}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite entries")
    return values


@dataclass(frozen=True)
class TensorField:
    """Grid array of 3x3 matrices; holds gradients and stress tensors."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, self.grid, (3, 3)))


@dataclass(frozen=True)
class VectorField:
    """Plain grid array of R^3 vectors with no extra invariants."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, self.grid, (3,)))


@dataclass(frozen=True)
class DirectorField(VectorField):
    """Unit-norm vector field; the norm tolerance is checked at construction.

    Pass ``norm_tol=None`` to carry fields whose norm has drifted (the
    simulator does this so drift can be *reported* instead of rejected).
    """

    norm_tol: float | None = 1e-10

    def __post_init__(self):
        super().__post_init__()
        if self.norm_tol is not None:
            drift = self.norm_drift()
            if drift > self.norm_tol:
                raise ValueError(
                    f"director norm drift {drift:.3e} exceeds tolerance {self.norm_tol:.1e}"
                )

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.sum(self.values**2, axis=-1) - 1.0)))


@dataclass(frozen=True)
class VelocityField(VectorField):
    """Velocity sample; zero on wall faces whenever a wall axis exists.

    ``wall_tol=None`` skips the no-slip check; :func:`leray_project` uses it
    for the raw ``u - grad(pi)`` form, whose tangential wall components are
    not zero in general.
    """

    wall_tol: float | None = 1e-12

    def __post_init__(self):
        super().__post_init__()
        ax = self.grid.wall_axis
        if ax is not None and self.wall_tol is not None:
            lo = np.take(self.values, 0, axis=ax)
            hi = np.take(self.values, -1, axis=ax)
            worst = max(float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
            if worst > self.wall_tol:
                raise ValueError(f"velocity not zero on wall faces (max {worst:.3e})")

    def max_divergence(self) -> float:
        """Max-norm of the discrete divergence over interior nodes."""
        div = divergence_vector(self)
        return float(np.max(np.abs(div[self.grid.interior_slices()])))


# ---------------------------------------------------------------------------
# stencils


def _axis_derivative(f: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Second-order first derivative of a scalar grid array along one axis."""
    h = grid.spacing[axis]
    if grid.topology[axis] == "periodic":
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)
    out = np.empty_like(f)
    sl = [slice(None)] * f.ndim

    def take(i):
        s = list(sl)
        s[axis] = i
        return tuple(s)

    out[take(slice(1, -1))] = (f[take(slice(2, None))] - f[take(slice(0, -2))]) / (2.0 * h)
    out[take(0)] = (-3.0 * f[take(0)] + 4.0 * f[take(1)] - f[take(2)]) / (2.0 * h)
    out[take(-1)] = (3.0 * f[take(-1)] - 4.0 * f[take(-2)] + f[take(-3)]) / (2.0 * h)
    return out


def _axis_second_derivative(f: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    h2 = grid.spacing[axis] ** 2
    if grid.topology[axis] == "periodic":
        return (np.roll(f, -1, axis=axis) - 2.0 * f + np.roll(f, 1, axis=axis)) / h2
    out = np.empty_like(f)
    sl = [slice(None)] * f.ndim

    def take(i):
        s = list(sl)
        s[axis] = i
        return tuple(s)

    out[take(slice(1, -1))] = (
        f[take(slice(2, None))] - 2.0 * f[take(slice(1, -1))] + f[take(slice(0, -2))]
    ) / h2
    out[take(0)] = (2.0 * f[take(0)] - 5.0 * f[take(1)] + 4.0 * f[take(2)] - f[take(3)]) / h2
    out[take(-1)] = (2.0 * f[take(-1)] - 5.0 * f[take(-2)] + 4.0 * f[take(-3)] - f[take(-4)]) / h2
    return out


def gradient_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    """(grad f)[..., i, j] = d_j f_i for a vector-valued array."""
    out = np.empty(grid.extents + (3, 3), dtype=values.dtype)
    for j in range(3):
        out[..., :, j] = _axis_derivative(values, grid, j)
    return out


def gradient(f: VectorField) -> TensorField:
    return TensorField(f.grid, gradient_array(f.values, f.grid))


def divergence_tensor_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    """(div A)[..., i] = sum_j d_j A_ij."""
    out = np.zeros(grid.extents + (3,), dtype=values.dtype)
    for j in range(3):
        out += _axis_derivative(values[..., :, j], grid, j)
    return out


def divergence(t: TensorField) -> VectorField:
    return VectorField(t.grid, divergence_tensor_array(t.values, t.grid))


def divergence_vector(f: VectorField) -> np.ndarray:
    """Scalar array: div of a vector field."""
    return sum(_axis_derivative(f.values[..., j], f.grid, j) for j in range(3))


def curl_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    d = [[_axis_derivative(values[..., i], grid, j) for j in range(3)] for i in range(3)]
    out = np.empty(grid.extents + (3,), dtype=values.dtype)
    out[..., 0] = d[2][1] - d[1][2]
    out[..., 1] = d[0][2] - d[2][0]
    out[..., 2] = d[1][0] - d[0][1]
    return out


def curl(f: VectorField) -> VectorField:
    return VectorField(f.grid, curl_array(f.values, f.grid))


def laplacian_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.zeros_like(values)
    for axis in range(3):
        out += _axis_second_derivative(values, grid, axis)
    return out


def laplacian(f: VectorField) -> VectorField:
    return VectorField(f.grid, laplacian_array(f.values, f.grid))


def scalar_gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.empty(grid.extents + (3,), dtype=values.dtype)
    for j in range(3):
        out[..., j] = _axis_derivative(values, grid, j)
    return out


def scalar_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    return laplacian_array(values, grid)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise cross product over trailing axis 3."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


# ---------------------------------------------------------------------------
# Leray projection


def _snap_zero(kappa: np.ndarray, h: float) -> np.ndarray:
    # sin(pi) is ~1e-16, not 0; snap so kernel modes are detected exactly.
    kappa[np.abs(kappa) * h < 1e-12] = 0.0
    return kappa


def _centered_symbols(grid: Grid) -> list[np.ndarray]:
    """Centered-difference first-derivative symbols per periodic axis."""
    kappas = []
    for ax in range(3):
        n, h = grid.extents[ax], grid.spacing[ax]
        theta = 2.0 * np.pi * np.fft.fftfreq(n)
        kappas.append(_snap_zero(np.sin(theta) / h, h))
    return kappas


def _leray_periodic(values: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    kx, ky, kz = _centered_symbols(grid)
    KX, KY, KZ = np.meshgrid(kx, ky, kz, indexing="ij")
    w = fft_workers()
    uh = fftn(values, axes=(0, 1, 2), workers=w)
    div_h = 1j * (KX * uh[..., 0] + KY * uh[..., 1] + KZ * uh[..., 2])
    k2 = KX**2 + KY**2 + KZ**2
    with np.errstate(divide="ignore", invalid="ignore"):
        pi_h = np.where(k2 > 0.0, -div_h / k2, 0.0)
    uh[..., 0] -= 1j * KX * pi_h
    uh[..., 1] -= 1j * KY * pi_h
    uh[..., 2] -= 1j * KZ * pi_h
    proj = np.real(ifftn(uh, axes=(0, 1, 2), workers=w))
    pi = np.real(ifftn(pi_h, workers=w))
    return proj, pi - pi.mean()


def _leray_slab(values: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    ax = grid.wall_axis
    assert ax is not None
    # Work with the wall axis last; component index stays in original order.
    order = [a for a in range(3) if a != ax] + [ax]
    inv = list(np.argsort(order))
    v = np.transpose(values, order + [3])
    t0, t1 = order[0], order[1]
    nz = grid.extents[ax]
    h = grid.spacing[ax]

    syms = _centered_symbols(grid)
    K0, K1 = np.meshgrid(syms[t0], syms[t1], indexing="ij")

    # Divergence with ghost-reflected centered stencils along the wall axis:
    # the normal component extends oddly (it vanishes on the walls).
    un = v[..., ax]
    div = np.empty_like(un)
    div[..., 1:-1] = (un[..., 2:] - un[..., :-2]) / (2.0 * h)
    div[..., 0] = un[..., 1] / h
    div[..., -1] = -un[..., -2] / h
    w = fft_workers()
    ft0 = fftn(v[..., t0], axes=(0, 1), workers=w)
    ft1 = fftn(v[..., t1], axes=(0, 1), workers=w)
    div = div + np.real(
        ifftn(1j * K0[..., None] * ft0 + 1j * K1[..., None] * ft1, axes=(0, 1), workers=w)
    )

    # Cosine modes along the wall axis (even extension), Fourier tangentially.
    dh = dct(fftn(div, axes=(0, 1), workers=w), type=1, axis=2)
    kz = _snap_zero(np.sin(np.pi * np.arange(nz) / (nz - 1)) / h, h)
    K2 = K0[..., None] ** 2 + K1[..., None] ** 2 + kz[None, None, :] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(K2 > 0.0, -dh / K2, 0.0)

    ph_z = idct(ph, type=1, axis=2)  # back to physical z, still tangential-Fourier
    pi = np.real(ifftn(ph_z, axes=(0, 1), workers=w))
    gt0 = np.real(ifftn(1j * K0[..., None] * ph_z, axes=(0, 1), workers=w))
    gt1 = np.real(ifftn(1j * K1[..., None] * ph_z, axes=(0, 1), workers=w))
    # d/dz of the cosine series: sine series with coefficients -kz_m * ph_m;
    # it vanishes on both walls by construction.
    gz = np.zeros_like(pi)
    sine_coeff = (-kz[None, None, 1:-1]) * ph[..., 1:-1]
    gz[..., 1:-1] = np.real(ifftn(idst(sine_coeff, type=1, axis=2), axes=(0, 1), workers=w))

    out = v.copy()
    out[..., t0] -= gt0
    out[..., t1] -= gt1
    out[..., ax] -= gz

    proj = np.transpose(out, inv + [3])
    pi_full = np.transpose(pi, inv)
    return proj, pi_full - pi_full.mean()


def leray_project(
    u: VectorField | VelocityField,
    tolerance: float = 1e-10,
    enforce_no_slip: bool = True,
) -> tuple[VelocityField, np.ndarray]:
    """Remove the discrete-gradient part of ``u``.

    Returns the projected velocity and the pressure-like potential (zero
    mean).  The pressure solve uses periodic (resp. homogeneous Neumann)
    conditions, so the correction never touches the normal wall component.
    The *tangential* correction does not vanish on walls; by default it is
    zeroed there afterwards to keep the no-slip invariant of
    :class:`VelocityField` (which leaves the interior divergence untouched).
    Pass ``enforce_no_slip=False`` for the raw ``u - grad(pi)`` form, which
    is exactly idempotent.

    Raises :class:`PoissonConvergenceError` if the post-projection interior
    divergence exceeds ``tolerance`` (relative to the field amplitude).
    """
    grid = u.grid
    ax = grid.wall_axis
    if ax is None:
        proj, pi = _leray_periodic(u.values, grid)
        out = VelocityField(grid, proj)
    else:
        proj, pi = _leray_slab(u.values, grid)
        if enforce_no_slip:
            sl_lo = [slice(None)] * 4
            sl_lo[ax] = 0
            sl_hi = [slice(None)] * 4
            sl_hi[ax] = -1
            proj[tuple(sl_lo)] = 0.0
            proj[tuple(sl_hi)] = 0.0
            out = VelocityField(grid, proj)
        else:
            out = VelocityField(grid, proj, wall_tol=None)
    residual = out.max_divergence()
    scale = max(1.0, float(np.max(np.abs(proj))))
    if residual > tolerance * scale:
        raise PoissonConvergenceError("projection left divergence above tolerance", residual)
    return out, pi


# ---------------------------------------------------------------------------
# snapshots

_TOPOLOGY_CODE = {"periodic": 0, "wall": 1}
_CODE_TOPOLOGY = {v: k for k, v in _TOPOLOGY_CODE.items()}


def write_snapshot(path: str | Path, field: VectorField) -> None:
    """Raw little-endian snapshot: magic, extents, spacing, topology codes,
    then row-major float64 triplets."""
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<3I", *grid.extents))
        fh.write(struct.pack("<3d", *grid.spacing))
        fh.write(struct.pack("<3B", *(_TOPOLOGY_CODE[t] for t in grid.topology)))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path: str | Path) -> VectorField:
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        extents = struct.unpack("<3I", fh.read(12))
        spacing = struct.unpack("<3d", fh.read(24))
        codes = struct.unpack("<3B", fh.read(3))
        topology = tuple(_CODE_TOPOLOGY[c] for c in codes)
        grid = Grid(extents, spacing, topology)  # type: ignore[arg-type]
        count = int(np.prod(extents)) * 3
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    return VectorField(grid, data.reshape(extents + (3,)).astype(float))


def export_csv(path: str | Path, field: VectorField, max_points: int = 1 << 16) -> None:
    """Per-point CSV export (small grids only)."""
    grid = field.grid
    npoints = int(np.prod(grid.extents))
    if npoints > max_points:
        raise ValueError(f"grid too large for CSV export ({npoints} > {max_points} points)")
    xs, ys, zs = grid.meshgrid()
    with open(path, "w") as fh:
        fh.write("x,y,z,v1,v2,v3\n")
        flat = field.values.reshape(-1, 3)
        coords = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)
        for (x, y, z), (a, b, c) in zip(coords, flat):
            fh.write(f"{x:.17g},{y:.17g},{z:.17g},{a:.17g},{b:.17g},{c:.17g}\n")
