"""Deterministic SVG rendering of decay charts."""

import numpy as np

import specband as sb
from specband.plotting import decay_plot


def _sample_inputs():
    times = sb.geometric_times(20.0, 2000.0, 24)
    norms = {
        "sup": 1.3 * times ** (-1.0 / 3.0),
        "wsup": 0.8 * times ** (-0.5),
        "l2": np.full_like(times, 0.5),
    }
    fits = {k: sb.fit_exponent(times, v) for k, v in norms.items()}
    predictions = {"sup": -1.0 / 3.0, "wsup": -0.5, "l2": None}
    return times, norms, fits, predictions


def test_decay_plot_writes_svg(tmp_path):
    times, norms, fits, predictions = _sample_inputs()
    path = tmp_path / "chart.svg"
    decay_plot(str(path), times, norms, fits=fits, predictions=predictions,
               title="sample decay")
    blob = path.read_text()
    assert "<svg" in blob
    for kind in norms:
        assert kind in blob   # legend entries present


def test_decay_plot_is_deterministic(tmp_path):
    times, norms, fits, predictions = _sample_inputs()
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    for path in (a, b):
        decay_plot(str(path), times, norms, fits=fits, predictions=predictions)
    assert a.read_bytes() == b.read_bytes()


def test_decay_plot_minimal_arguments(tmp_path):
    times = sb.geometric_times(1.0, 10.0, 5)
    path = tmp_path / "bare.svg"
    decay_plot(str(path), times, {"sup": times ** -0.5})
    assert path.stat().st_size > 0
