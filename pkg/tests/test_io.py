import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pxneumann.cli import main
from pxneumann.config import build_config, parse_blocks, parse_config, profile
from pxneumann.errors import ConfigError, ParseError, UnsupportedFormat
from pxneumann.grid import Grid
from pxneumann.pgm import ImageBuffer, load_pgm, quantize, save_pgm
from pxneumann.solver import SolveReport
from pxneumann.trace import emit_trace

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def write(path, data):
    with open(path, "wb") as fh:
        fh.write(data)
    return str(path)


# images


def test_p2_with_comments(tmp_path):
    p = write(tmp_path / "a.pgm", b"P2\n# comment\n3 2\n# another\n4\n0 1 2\n3 4 # tail\n0\n")
    img = load_pgm(p)
    assert (img.width, img.height) == (3, 2)
    np.testing.assert_array_equal(img.pixels, np.array([[0, 1, 2], [3, 4, 0]]) / 4)


def test_p5_eight_and_sixteen_bit(tmp_path):
    p = write(tmp_path / "b.pgm", b"P5 2 2 255\n" + bytes([0, 255, 128, 1]))
    np.testing.assert_array_equal(load_pgm(p).pixels, np.array([[0, 255], [128, 1]]) / 255)
    p = write(tmp_path / "c.pgm", b"P5\n2 1\n65535\n" + bytes([0xFF, 0xFF, 0x00, 0x01]))
    np.testing.assert_array_equal(load_pgm(p).pixels, np.array([[65535, 1]]) / 65535)


@pytest.mark.parametrize(
    "data",
    [b"P5\n4 4\n255\n" + bytes(10), b"P2\n2 2\n255\n1 2 3", b"P5\n4 4", b"P2\n2 x\n255\n", b"P2\n1 1\n3\n9\n"],
)
def test_malformed_raises_parse_error(tmp_path, data):
    with pytest.raises(ParseError):
        load_pgm(write(tmp_path / "bad.pgm", data))


@pytest.mark.parametrize("data", [b"P6\n1 1\n255\n\x00\x00\x00", b"P2\n1 1\n70000\n0\n", b"P2\n1 1\n0\n0\n"])
def test_unsupported(tmp_path, data):
    with pytest.raises(UnsupportedFormat):
        load_pgm(write(tmp_path / "u.pgm", data))


def test_quantize_rounds_half_up():
    np.testing.assert_array_equal(quantize([0.0, 1.0, 0.5, 1 / 510, 0.999]), [0, 255, 128, 1, 255])


@settings(max_examples=30)
@given(arrays(float, (5, 7), elements=st.floats(0, 1)), st.booleans())
def test_round_trip_within_half_level(tmp_path_factory, px, binary):
    path = str(tmp_path_factory.mktemp("rt") / "x.pgm")
    save_pgm(ImageBuffer(7, 5, px), path, binary=binary)
    back = load_pgm(path)
    assert np.max(np.abs(back.pixels - px)) <= 1 / 510 + 1e-15


def test_round_trip_sixteen_bit(tmp_path, rng):
    px = rng.random((4, 6))
    save_pgm(ImageBuffer(6, 4, px), str(tmp_path / "w.pgm"), maxval=65535)
    assert np.max(np.abs(load_pgm(str(tmp_path / "w.pgm")).pixels - px)) <= 0.5 / 65535 + 1e-15


def test_save_rejects_out_of_range(tmp_path):
    with pytest.raises(ValueError):
        save_pgm(ImageBuffer(1, 1, [[1.1]]), str(tmp_path / "o.pgm"))
    with pytest.raises(ValueError):
        ImageBuffer(2, 2, np.zeros((3, 2)))


# configuration


def test_golden_minimal_config():
    cfg = parse_config(os.path.join(CONFIGS, "minimal.conf"))
    assert cfg.grid.shape == (32, 32)
    assert cfg.run["command"] == "solve-aux" and cfg.run["lambda"] == 1.0
    assert len(cfg.phases) == 1
    np.testing.assert_array_equal(cfg.phase_spec().p_max.values, 2.0)
    assert cfg.reaction_source().lambda0 > 0


def test_denoise_config_loads():
    cfg = parse_config(os.path.join(CONFIGS, "denoise.conf"))
    assert cfg.grid.shape == (64, 64) and len(cfg.phases) == 2
    assert cfg.run["tau"] == 0.5


def conf(text, command=None):
    return build_config(parse_blocks(text, "t.conf"), "t.conf", command)


def test_missing_lambda_for_solve_aux():
    with pytest.raises(ConfigError) as exc:
        conf("grid { nx = 8 }", command="solve-aux")
    assert exc.value.key == "run.lambda" and "t.conf" in str(exc.value)


@pytest.mark.parametrize(
    "text",
    [
        "phase { weight = -1 exponent = 2 }",
        "phase { weight = 1 exponent = 1 }",
        "phase { weight = 1 }",
        "grid { nx = 8 colour = 3 }",
        "mesh { nx = 8 }",
        "grid { nx = 8 } grid { nx = 9 }",
        "grid { nx = 8 nx = 9 }",
        "grid { nx = 8.5 }",
        "grid { nx = 8",
        "grid nx = 8 }",
        'phase { weight = "wobble 1 2" exponent = 2 }',
        'solver { gradient_model = "edge" }',
        "reaction { alpha = -1 }",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        conf(text)


def test_profiles():
    g = Grid(4, 2, 0.25, 0.5)
    np.testing.assert_allclose(profile("linear-ramp 0 1", g)[0], [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(profile("linear-ramp-y 2 4", g)[:, 0], [2.5, 3.5])
    np.testing.assert_array_equal(profile("checker 1 2", g)[0], [1, 2, 1, 2])
    np.testing.assert_array_equal(profile("constant 3", g), 3.0)
    np.testing.assert_array_equal(profile(1.5, g), 1.5)
    r = profile("radial 0 1", Grid.unit_square(2))
    np.testing.assert_allclose(r, 0.5)


# traces


def report(history):
    return SolveReport(np.zeros((2, 2)), 0.0, 0.0, len(history), 0.0, history)


def test_trace_empty_history(tmp_path):
    p = tmp_path / "t.csv"
    emit_trace(report([]), p)
    assert p.read_text() == "iter,energy,grad_residual\n"


def test_trace_three_iterations(tmp_path):
    p = tmp_path / "t.csv"
    emit_trace(report([(1, 0.5, 1e-3), (2, 0.25, 1e-6), (3, 0.1, 1e-10)]), p)
    lines = p.read_text().splitlines()
    assert len(lines) == 4 and lines[1] == "1,0.5,0.001"
    assert float(lines[3].split(",")[2]) == 1e-10


def test_trace_bare_history_needs_kind(tmp_path):
    with pytest.raises(ValueError):
        emit_trace([(1, 0.1, 0.2)], tmp_path / "t.csv")
    emit_trace([(1, 0.1, 0.2)], tmp_path / "t.csv", kind="step")
    assert (tmp_path / "t.csv").read_text().startswith("step,delta_max,energy\n")


# command line


def test_cli_solve_aux_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        args = ["solve-aux", "--config", os.path.join(CONFIGS, "minimal.conf"), "--grid", "12x10"]
        assert main(args + ["--out", str(d), "--trace", str(d / "trace.csv")]) == 0
        outs.append(((d / "trace.csv").read_bytes(), (d / "V.pgm").read_bytes()))
    assert outs[0] == outs[1]
    img = load_pgm(str(tmp_path / "0" / "V.pgm"))
    assert (img.width, img.height) == (12, 10)
    assert "iters" in capsys.readouterr().out


def test_cli_solve_aux_source_image_and_schedule(tmp_path):
    px = np.linspace(0, 1, 48).reshape(6, 8)
    src = str(tmp_path / "src.pgm")
    save_pgm(ImageBuffer(8, 6, px), src)
    rc = main(["solve-aux", "--lambda", "2", "--source-image", src, "--eps-schedule", "1e-2 0", "--out", str(tmp_path)])
    assert rc == 0
    assert load_pgm(str(tmp_path / "V.pgm")).pixels.shape == (6, 8)


def test_cli_missing_lambda_is_an_error(tmp_path, capsys):
    assert main(["solve-aux", "--out", str(tmp_path)]) == 1
    assert "lambda" in capsys.readouterr().err


def test_cli_bad_image(tmp_path):
    bad = write(tmp_path / "bad.pgm", b"P2\n3 3\n255\n1 2\n")
    assert main(["solve-aux", "--lambda", "1", "--source-image", bad, "--out", str(tmp_path)]) == 1


def test_cli_denoise_from_input(tmp_path):
    rng = np.random.default_rng(3)
    inp = str(tmp_path / "in.pgm")
    save_pgm(ImageBuffer(8, 8, rng.random((8, 8))), inp)
    out = str(tmp_path / "den.pgm")
    rc = main(["denoise", "--tau", "1", "--steps", "300", "--input", inp, "--output", out,
               "--trace", str(tmp_path / "d.csv"), "--out", str(tmp_path)])
    assert rc == 0
    assert load_pgm(out).pixels.shape == (8, 8)
    assert (tmp_path / "d.csv").read_text().startswith("step,delta_max,energy\n")


def test_cli_denoise_not_steady_exit_code(tmp_path):
    rc = main(["denoise", "--tau", "0.1", "--steps", "2", "--out", str(tmp_path), "--seed", "1"])
    assert rc == 2
    assert (tmp_path / "noisy.pgm").exists() and (tmp_path / "denoised.pgm").exists()


def test_cli_steady_states(tmp_path):
    assert main(["steady-states", "--grid", "8x8", "--out", str(tmp_path)]) == 0
    for name in ("U_min.pgm", "U_max.pgm", "iterations_min.csv", "iterations_max.csv"):
        assert (tmp_path / name).exists()
    np.testing.assert_allclose(load_pgm(str(tmp_path / "U_max.pgm")).pixels, 1.0)


def test_cli_verify_and_norm(tmp_path, capsys):
    assert main(["verify", "--grid", "8x8", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out
    assert main(["norm", "--out", str(tmp_path), "--seed", "4"]) == 0
    assert "norm" in capsys.readouterr().out
