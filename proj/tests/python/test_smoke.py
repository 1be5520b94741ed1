import math

import numpy as np
import pytest

import lrdenoise as lrd


def scene(side=40):
    r, c = np.mgrid[0:side, 0:side]
    return np.where((r // 8 + c // 8) % 2 == 0, 60.0, 180.0) + c


def fast_config(sigma, mode="gwnnm"):
    cfg = lrd.DenoiseConfig(sigma, mode)
    cfg.iterations = 3
    cfg.patch_size = 5
    cfg.patch_count = 20
    cfg.window = 15
    cfg.stride = 3
    return cfg


def test_denoise_improves_psnr():
    clean = scene()
    noisy = lrd.add_gaussian_noise(clean, 25.0, seed=3)
    image, low, high, trace = lrd.denoise(noisy, fast_config(25.0))
    assert image.shape == clean.shape
    assert low.shape == high.shape == clean.shape
    assert np.isfinite(image).all()
    assert lrd.psnr(image, clean) > lrd.psnr(noisy, clean) + 3.0
    assert len(trace) == 2
    assert trace[0]["sigma_hat"] == 25.0


def test_denoise_is_deterministic():
    noisy = lrd.add_gaussian_noise(scene(), 30.0, seed=4)
    a = lrd.denoise(noisy, fast_config(30.0))[0]
    b = lrd.denoise(noisy, fast_config(30.0))[0]
    assert np.array_equal(a, b)


def test_wnnm_matches_reduced_gwnnm():
    noisy = lrd.add_gaussian_noise(scene(), 30.0, seed=5)
    g = fast_config(30.0, "gwnnm")
    g.alpha_override = 1.0
    g.eta = 0.0
    assert np.array_equal(lrd.denoise(noisy, g)[0], lrd.denoise(noisy, fast_config(30.0, "wnnm"))[0])


def test_defaults():
    cfg = lrd.DenoiseConfig(50.0)
    assert (cfg.patch_size, cfg.patch_count, cfg.iterations) == (8, 120, 14)
    assert cfg.alpha() == 0.8
    assert lrd.DenoiseConfig(10.0).alpha() == 0.9
    assert lrd.DenoiseConfig(50.0, "wnnm").alpha() == 1.0
    with pytest.raises(lrd.LrdError):
        lrd.DenoiseConfig(50.0, "bm3d")


def test_kernels():
    s = np.array([10.0, 5.0, 1.0])
    assert np.allclose(lrd.nnm_shrink(s, 2.0), [8.0, 3.0, 0.0])
    adj = lrd.adjust_singulars(s, 4, 2.0)
    assert np.allclose(adj, [math.sqrt(84.0), 3.0, 0.0])
    w = lrd.wnnm_weights(adj, 2.0, 4)
    assert w[0] == pytest.approx(4.0 / math.sqrt(84.0))
    assert np.allclose(lrd.wnnm_shrink(s, np.array([1.0, 6.0, 0.5])), [9.0, 0.0, 0.5])
    high, low = lrd.split_spectrum(np.array([3.0, 0.5, 0.2]), 0.5)
    assert np.array_equal(high, [3.0, 0.0, 0.0])
    assert np.array_equal(low, [0.0, 0.5, 0.2])
    with pytest.raises(lrd.LrdError):
        lrd.wnnm_shrink(s, np.array([1.0]))


def test_svd_reconstructs():
    m = np.random.default_rng(1).normal(size=(36, 70))
    u, s, v = lrd.svd(m)
    assert np.allclose(u @ np.diag(s) @ v.T, m, atol=1e-10)
    assert np.all(np.diff(s) <= 0)


def test_pgm_round_trip_and_noise_estimate(tmp_path):
    img = lrd.add_gaussian_noise(np.full((160, 160), 128.0), 20.0, seed=9)
    path = str(tmp_path / "n.pgm")
    lrd.save_pgm(path, img)
    back = lrd.load_pgm(path)
    assert back.shape == (160, 160)
    assert np.array_equal(back, np.clip(np.round(img), 0, 255))
    sigma, _ = lrd.estimate_noise(back)
    assert sigma == pytest.approx(20.0, rel=0.05)
    with pytest.raises(lrd.LrdError):
        lrd.load_pgm(str(tmp_path / "missing.pgm"))


def test_cli_entry(tmp_path):
    path = str(tmp_path / "c.pgm")
    lrd.save_pgm(path, scene())
    code, out, _ = lrd.run_cli(["denoise", "-i", path, "-o", str(tmp_path / "o.pgm"), "--sigma", "20",
                                "--add-noise", "--clean", path, "-q", "-L", "2", "--patch-size", "5",
                                "--patch-count", "20", "--window", "15"])
    assert code == 0
    assert out.startswith("psnr_noisy=")
    assert lrd.run_cli(["denoise", "-i", path, "-o", "x.pgm", "--sigma", "-5"])[0] == 2
