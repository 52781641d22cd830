import numpy as np

from nematic_kit.fields import Grid


def angle_director(grid: Grid, amplitude: float = 0.7):
    """Exactly-unit smooth director with a hand-coded analytic gradient."""
    X, Y, Z = grid.meshgrid()
    angle = amplitude * np.sin(X) * np.cos(2.0 * Y) + 0.3 * np.sin(Z)
    d = np.zeros(grid.extents + (3,))
    d[..., 0] = np.cos(angle)
    d[..., 1] = np.sin(angle)
    grad_angle = np.zeros(grid.extents + (3,))
    grad_angle[..., 0] = amplitude * np.cos(X) * np.cos(2.0 * Y)
    grad_angle[..., 1] = -2.0 * amplitude * np.sin(X) * np.sin(2.0 * Y)
    grad_angle[..., 2] = 0.3 * np.cos(Z)
    grad = np.zeros(grid.extents + (3, 3))
    grad[..., 0, :] = -np.sin(angle)[..., None] * grad_angle
    grad[..., 1, :] = np.cos(angle)[..., None] * grad_angle
    return d, grad


def tilted_smooth_director(grid: Grid, eps: float = 0.05):
    """Small smooth perturbation of e3, normalized to exact unit length."""
    X, Y, Z = grid.meshgrid()
    v = np.zeros(grid.extents + (3,))
    v[..., 0] = eps * np.sin(X) * np.cos(Y)
    v[..., 1] = eps * np.sin(Y) * np.cos(Z)
    v[..., 2] = 1.0
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
