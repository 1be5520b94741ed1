"""Patch-based low-rank image denoising (NNM / WNNM / GWNNM)."""

from ._lrdenoise import (
    DenoiseConfig,
    LrdError,
    add_gaussian_noise,
    adjust_singulars,
    denoise,
    estimate_noise,
    load_pgm,
    nnm_shrink,
    psnr,
    run_cli,
    save_pgm,
    split_spectrum,
    svd,
    wnnm_shrink,
    wnnm_weights,
)

__all__ = [
    "DenoiseConfig",
    "LrdError",
    "add_gaussian_noise",
    "adjust_singulars",
    "denoise",
    "estimate_noise",
    "load_pgm",
    "nnm_shrink",
    "psnr",
    "run_cli",
    "save_pgm",
    "split_spectrum",
    "svd",
    "wnnm_shrink",
    "wnnm_weights",
]
