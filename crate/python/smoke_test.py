"""Smoke test for the pyscatterlab extension module."""

import math

import pyscatterlab as sl


def test_feature_dimension():
    fb = sl.Filterbank("morlet", q=1, j=8, signal_len=1024)
    assert len(fb) == 8
    assert fb.lambdas[0] == 0.25
    y = sl.additive_tone(1.0, 0.5, 16)
    assert len(y) == 1024
    f = fb.scatter(y)
    assert len(f) == 37
    assert f.labels[0] == "S0"
    assert all(v >= 0 for v in f.values[1:])
    assert f.get([0]) == f.values[1]


def test_pure_tone_amplitude():
    fb = sl.Filterbank("gammatone", q=1, j=6, signal_len=1024)
    k = int(fb.lambdas[0] * 1024)
    y = [math.cos(2 * math.pi * k * t / 1024) for t in range(1024)]
    peak = max(fb.magnitude(0))
    row = fb.scalogram(y)[0]
    assert all(abs(math.sqrt(v) - 0.5 * peak) < 1e-9 for v in row)


def test_pure_tone_renormalized_is_negligible():
    fb = sl.Filterbank("morlet", q=1, j=8, signal_len=1024)
    y = sl.two_tone(1.0, 0.0, 0.125, 0.1, 1024)
    table = fb.renormalized(y)
    assert len(table) == 28
    assert all(abs(v) < 1e-12 for (_, _, v) in table)


def test_depth_bound():
    passed, beyond, violations = sl.verify_theorem([1, 2, 3, 4, 8])
    assert passed and not violations
    assert [n for n, _ in beyond] == [1, 2, 3, 4, 8]
    assert sl.depth_bound(3) == 2
    stack = sl.Filterbank("shannon", q=1, j=7, signal_len=4096, lambda_max=(64 * 8 - 0.5) / 4096)
    f = stack.scatter(sl.harmonic_stack(4, 8), max_order=4)
    e = f.layer_energies
    assert e[1] / e[0] > 1e-6 and all(x / e[0] <= 1e-8 for x in e[2:])


def test_mfcc_and_isomap():
    assert len(sl.mfcc(sl.additive_tone(0.5, 0.2, 14))) == 12
    grid = [[float(i), float(j)] for i in range(6) for j in range(6)]
    coords, eig, kept = sl.isomap(grid, 4, dim=3)
    assert len(coords) == 36 and kept == list(range(36))
    assert eig[0] >= eig[1] >= eig[2]
    assert abs(sl.spearman([1, 2, 3, 4], [10, 20, 30, 40]) - 1.0) < 1e-12


def test_errors():
    for bad in (lambda: sl.Filterbank("haar"), lambda: sl.two_tone(1, 1, 0.7, 0.1, 64)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
