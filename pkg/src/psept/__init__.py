"""Polar separable transform for disk-supported grayscale images.

Quick start::

    from psept import load_image, default_grid, cart_to_polar, forward, inverse
    img = load_image("face.pgm")
    grid = default_grid(img.width, img.height)
    coeffs = forward(cart_to_polar(img, grid))
    back = inverse(coeffs).real()
"""

__version__ = "0.1.0"

from ._accel import BACKEND, available_backends
from .bases import KernelIndex, build_kernel_matrix, full_index_set, kernel
from .features import SelectionRule, FeatureVector, magnitude_invariants, select, selection_mask
from .image_io import GrayImage, load_image, save_image
from .metrics import psnr, quality_report, rmse
from .polar_grid import PolarGrid, PolarImage, build_grid, cart_to_polar, default_grid, polar_to_cart
from .transform import CoefficientTable, forward, inverse

__all__ = [
    "BACKEND",
    "available_backends",
    "KernelIndex",
    "build_kernel_matrix",
    "full_index_set",
    "kernel",
    "SelectionRule",
    "FeatureVector",
    "magnitude_invariants",
    "select",
    "selection_mask",
    "GrayImage",
    "load_image",
    "save_image",
    "psnr",
    "quality_report",
    "rmse",
    "PolarGrid",
    "PolarImage",
    "build_grid",
    "cart_to_polar",
    "default_grid",
    "polar_to_cart",
    "CoefficientTable",
    "forward",
    "inverse",
]
