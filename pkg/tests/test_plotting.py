import numpy as np
import pytest

from usvswarm.plotting import METRICS, metric_series, render_svg, write_plots


def test_every_metric_renders_deterministically(equilibrium_run, tmp_path):
    trace, _ = equilibrium_run
    for name in METRICS:
        a, b = render_svg(trace, name), render_svg(trace, name)
        assert a == b and a.startswith(b"<?xml")
    paths = write_plots(trace, list(METRICS), tmp_path)
    assert sorted(p.name for p in paths) == sorted(f"{m}.svg" for m in METRICS)


def test_rho_series_labels(equilibrium_run):
    t, series = metric_series(equilibrium_run[0], "rho")
    assert list(series) == ["rho_0", "rho_1", "rho_2"]
    assert all(np.allclose(v, 10.0) for v in series.values())
    assert np.allclose(np.diff(t), 0.2)


def test_phase_wrapped_to_half_open_range(equilibrium_run):
    _, series = metric_series(equilibrium_run[0], "phase")
    vals = np.concatenate(list(series.values()))
    assert np.all(vals >= -180) and np.all(vals < 180)
    assert np.allclose(np.abs(vals), 120.0)


def test_unknown_metric_lists_available(equilibrium_run):
    with pytest.raises(KeyError, match="rho, phase"):
        metric_series(equilibrium_run[0], "speed")


def test_empty_trace_writes_nothing(tmp_path):
    with pytest.raises(ValueError):
        write_plots([], ["rho"], tmp_path / "out")
    assert not (tmp_path / "out").exists()
