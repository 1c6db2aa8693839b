"""Rendering tests against the committed reference CSVs."""

from pathlib import Path

import pytest

from anofdm_plots.render import FigureJob, build_figure, render
from anofdm_plots.schema import SchemaMismatchError, load_metadata, load_results

DATA = Path(__file__).parent / "data"

# expected number of plotted series per figure:
# fig1: bob + eve joint + eve approx + secrecy; fig2: joint + per-subchannel;
# fig3/fig4: one per scheme; fig5: one per scheme
SERIES_COUNTS = {"fig1": 4, "fig2": 2, "fig3": 4, "fig4": 4, "fig5": 2}
ERRORBAR_COUNTS = {"fig1": 1, "fig2": 2, "fig3": 4, "fig4": 4, "fig5": 2}


def job_for(which, out):
    return FigureJob(
        csv_path=DATA / which / "results.csv",
        metadata_path=DATA / which / "metadata.json",
        figure_id=which,
        output_dir=out,
    )


@pytest.mark.parametrize("which", ["fig1", "fig2", "fig3", "fig4", "fig5"])
def test_renders_both_formats(tmp_path, which):
    written = render(job_for(which, tmp_path))
    assert [p.name for p in written] == [f"{which}.png", f"{which}.svg"]
    for p in written:
        assert p.stat().st_size > 2000


@pytest.mark.parametrize("which", ["fig1", "fig2", "fig3", "fig4", "fig5"])
def test_series_counts_and_axes(which):
    rows = load_results(DATA / which / "results.csv")
    meta = load_metadata(DATA / which / "metadata.json")
    fig = build_figure(rows, meta, which)
    try:
        ax = fig.axes[0]
        assert len(ax.containers) == ERRORBAR_COUNTS[which]  # error-bar series
        handles, labels = ax.get_legend_handles_labels()
        assert len(labels) == SERIES_COUNTS[which]
        assert len(set(labels)) == SERIES_COUNTS[which]
        assert "bits/sec" in ax.get_ylabel()
        assert ax.get_xlabel()
        # every error-bar container carries vertical bars
        for container in ax.containers:
            assert container.has_yerr
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def test_fig5_axis_is_bob_memory():
    rows = load_results(DATA / "fig5" / "results.csv")
    meta = load_metadata(DATA / "fig5" / "metadata.json")
    fig = build_figure(rows, meta, "fig5")
    ax = fig.axes[0]
    assert "memory" in ax.get_xlabel()
    xs = ax.containers[0][0].get_xdata()
    assert min(xs) == 1.0 and max(xs) == 16.0
    import matplotlib.pyplot as plt

    plt.close(fig)


def test_assumed_footnote_present():
    rows = load_results(DATA / "fig3" / "results.csv")
    meta = load_metadata(DATA / "fig3" / "metadata.json")
    fig = build_figure(rows, meta, "fig3")
    texts = [t.get_text() for t in fig.texts]
    assert any("assumed defaults" in t for t in texts)
    import matplotlib.pyplot as plt

    plt.close(fig)


def test_rendering_is_deterministic(tmp_path):
    a = render(job_for("fig5", tmp_path / "a"))
    b = render(job_for("fig5", tmp_path / "b"))
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_preset_mismatch_rejected(tmp_path):
    job = FigureJob(
        csv_path=DATA / "fig5" / "results.csv",
        metadata_path=DATA / "fig3" / "metadata.json",
        figure_id="fig5",
        output_dir=tmp_path,
    )
    with pytest.raises(SchemaMismatchError):
        render(job)
    assert not list(tmp_path.iterdir())


def test_unknown_figure_id_rejected(tmp_path):
    with pytest.raises(ValueError):
        FigureJob(
            csv_path=DATA / "fig5" / "results.csv",
            metadata_path=DATA / "fig5" / "metadata.json",
            figure_id="fig9",
            output_dir=tmp_path,
        )
