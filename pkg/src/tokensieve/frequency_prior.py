"""High-frequency spatial prior.

Filters a grayscale frame with a fixed 3x3 operator, pools the absolute
response onto the patch grid, and max-normalizes into [0, 1]. The default
operator is the 4-neighbor discrete Laplacian; variance and Sobel variants
are selectable for ablation.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, SizeError
from .tensor_io import ImageFrame

# 4-neighbor stencil; swap for the 8-neighbor variant here if ever needed.
LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])


def convolve3x3(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 correlation with replicate border padding."""
    h, w = image.shape
    padded = np.pad(image, 1, mode="edge")
    out = np.zeros((h, w))
    for di in range(3):
        for dj in range(3):
            weight = kernel[di, dj]
            if weight != 0.0:
                out += weight * padded[di : di + h, dj : dj + w]
    return out


def laplacian_response(frame: ImageFrame) -> np.ndarray:
    """Absolute Laplacian response; zero on constant and linear regions."""
    if frame.height < 3 or frame.width < 3:
        raise SizeError(f"frame must be at least 3x3, got {frame.height}x{frame.width}")
    return np.abs(convolve3x3(frame.pixels, LAPLACIAN_KERNEL))


def pool_prior(response: np.ndarray, grid_rows: int, grid_cols: int) -> np.ndarray:
    """Average-pool a response map onto the patch grid and max-normalize.

    Blocks partition the image; remainder pixels fold into the last block per
    axis. An all-zero map yields an all-zero prior (no division); otherwise
    the grid maximum is exactly 1.
    """
    h, w = response.shape
    if grid_rows < 1 or grid_cols < 1:
        raise SizeError("grid dimensions must be at least 1")
    if grid_rows > h or grid_cols > w:
        raise SizeError(f"grid {grid_rows}x{grid_cols} exceeds map {h}x{w}")
    rows = _block_edges(h, grid_rows)
    cols = _block_edges(w, grid_cols)
    grid = np.zeros((grid_rows, grid_cols))
    for r in range(grid_rows):
        for c in range(grid_cols):
            grid[r, c] = response[rows[r] : rows[r + 1], cols[c] : cols[c + 1]].mean()
    peak = grid.max()
    if peak > 0.0:
        grid /= peak
    return grid


def _block_edges(extent: int, blocks: int) -> list:
    size = extent // blocks
    edges = [i * size for i in range(blocks)]
    edges.append(extent)
    return edges


def prior_variant(op: str, frame: ImageFrame, grid_rows: int, grid_cols: int) -> np.ndarray:
    """Patch prior under one of the selectable spatial operators.

    none:           all-zero prior (spatial modulation disabled).
    patch_variance: per-block pixel variance, max-normalized.
    sobel:          gradient magnitude from the 3x3 Sobel pair.
    laplacian:      absolute Laplacian response (the default pipeline).
    """
    if op == "none":
        return np.zeros((grid_rows, grid_cols))
    if op == "patch_variance":
        return _variance_prior(frame, grid_rows, grid_cols)
    if op == "sobel":
        gx = convolve3x3(frame.pixels, SOBEL_X)
        gy = convolve3x3(frame.pixels, SOBEL_Y)
        return pool_prior(np.sqrt(gx * gx + gy * gy), grid_rows, grid_cols)
    if op == "laplacian":
        return pool_prior(laplacian_response(frame), grid_rows, grid_cols)
    raise ConfigError(f"unknown spatial_operator {op!r}")


def _variance_prior(frame: ImageFrame, grid_rows: int, grid_cols: int) -> np.ndarray:
    h, w = frame.pixels.shape
    if grid_rows > h or grid_cols > w:
        raise SizeError(f"grid {grid_rows}x{grid_cols} exceeds frame {h}x{w}")
    rows = _block_edges(h, grid_rows)
    cols = _block_edges(w, grid_cols)
    grid = np.zeros((grid_rows, grid_cols))
    for r in range(grid_rows):
        for c in range(grid_cols):
            grid[r, c] = frame.pixels[rows[r] : rows[r + 1], cols[c] : cols[c + 1]].var()
    peak = grid.max()
    if peak > 0.0:
        grid /= peak
    return grid
