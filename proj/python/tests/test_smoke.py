import json
import math

import numpy as np
import pytest

import beals


def commensurate_setup():
    grid = beals.Grid.commensurate(1, 8.0, 16)
    frame = beals.GaborFrame(grid, beals.Window(1), beals.FrameIndexSet(1, 7, 16))
    return grid, frame


def test_frame_is_tight_on_commensurate_grid():
    grid, frame = commensurate_setup()
    assert frame.exactly_tight
    x = np.array([grid.coord(k) for k in range(grid.N)])
    f = np.exp(-((x - 0.3) ** 2)) * np.exp(0.7j * x)
    c = frame.analyze(f)
    assert c.shape == (15, 33)
    assert np.allclose(frame.synthesize(c), f, atol=1e-10)
    assert abs(np.sum(abs(c) ** 2) - grid.h * np.sum(abs(f) ** 2)) < 1e-10


def test_quantize_one_is_identity_on_band_limited():
    grid = beals.Grid(1, 8.0, 256)
    K = beals.quantize(grid, "one")
    x = np.array([grid.coord(k) for k in range(grid.N)])
    f = np.exp(-((x - 0.4) ** 2) / 1.62)
    assert np.linalg.norm(K.apply(f) - f) / np.linalg.norm(f) < 1e-8


def test_round_trip_d1():
    grid, frame = commensurate_setup()
    K = beals.quantize(grid, "gauss")
    M = beals.matrix_elements(K, frame)
    bound = beals.matrix_element_bound(frame, beals.operator_norm(K))
    assert M.max_abs() <= bound * (1 + 1e-6)
    t = [grid.coord(k) for k in range(grid.N) if abs(grid.coord(k)) <= 2]
    xi = np.linspace(-2, 2, 9)
    a = beals.extract_symbol(M, frame, 0.0, t, xi)
    ref = np.exp(-np.subtract.outer(np.square(t), -np.square(xi)))
    assert np.max(abs(a - ref)) < 1e-3
    rep = M.decay_report()
    assert not rep["outside_hypotheses"]


def test_magnetic_phase_and_errors():
    pe = beals.PhaseEvaluator(beals.MagneticField.constant(1.0))
    assert math.isclose(pe.phase([1, 0], [0, 1]), -0.5, abs_tol=1e-14)
    assert abs(pe.phase([0.3, 0.2], [-1, 2]) + pe.phase([-1, 2], [0.3, 0.2])) < 1e-14
    with pytest.raises(beals.GridError):
        beals.GaborFrame(beals.Grid(1, 4.0, 64), beals.Window(1), beals.FrameIndexSet(1, 4, 8))
    assert issubclass(beals.TruncationError, beals.Error)


def test_cross_spectrum_value():
    w = beals.Window(1)
    assert abs(beals.window_cross_spectrum(w, [0.0], [0.0], [0.0]) - 1 / math.pi) < 1e-10


def test_run_experiment(tmp_path):
    cfg = tmp_path / "g.toml"
    cfg.write_text("[field]\nkind = constant\nb = 1\n[sampling]\ntriples = 10\n")
    rep = beals.run_experiment("geometry-check", str(cfg), out=str(tmp_path / "out"))
    assert rep["passed"]
    on_disk = json.loads((tmp_path / "out" / "geometry-check.json").read_text())
    assert on_disk["checks"] == rep["checks"]
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid]\nd = 5\n")
    with pytest.raises(beals.ConfigError):
        beals.run_experiment("frame-check", str(bad))
