"""The reproducible study runner.

One run sweeps the full factorial of (batch maximum, fit mode, centre
count, repeat).  Every cell derives its own 64-bit seed by mixing the
config seed with the cell label, samples a fresh mini-batch loss surface,
fits a surrogate, and writes its artifacts under cells/<id>/; the analytic
full-batch reference surface is written once under reference/.  index.json
ties the tree together.  Output is byte-identical for identical configs,
regardless of worker-thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .analysis import evaluate_surface, locate_min, make_report
from .artifacts import (
    surrogate_json,
    write_json,
    write_observations_csv,
    write_surface_csv,
)
from .config import ExperimentConfig
from .problem import (
    MiniBatchPolicy,
    analytic_loss,
    generate_full_batch,
    sample_loss_surface,
)
from .rng import derive_key, derive_stream
from .surrogate import (
    FitFailure,
    FitMode,
    FitRecipe,
    fit_surrogate,
    training_mse,
    translate_to_zero,
)
from .svg import render_heatmap_svg

_CELL_FILES = (
    "observations.csv",
    "surface_train.csv",
    "surface_report.csv",
    "model.json",
    "report.json",
    "heatmap.svg",
)


@dataclass(frozen=True)
class RunCell:
    """Coordinates of one cell of the experiment matrix."""

    batch_max: int
    mode: FitMode
    n_centres: int
    repeat: int

    @property
    def cell_id(self) -> str:
        return f"b{self.batch_max}_{self.mode.value}_c{self.n_centres}_r{self.repeat}"

    @property
    def label(self) -> str:
        return f"cell/b{self.batch_max}/{self.mode.value}/c{self.n_centres}/r{self.repeat}"

    def derived_seed(self, seed: int) -> int:
        """The cell's own 64-bit seed, a pure function of (seed, coordinates)."""
        return derive_key(seed, self.label)


def enumerate_cells(config: ExperimentConfig) -> list[RunCell]:
    """All cells in canonical order: batch, then mode, then centres, then repeat."""
    return [
        RunCell(batch_max=b, mode=m, n_centres=c, repeat=r)
        for b in config.batch_max_list
        for m in config.mode_list
        for c in config.centre_list
        for r in range(config.repeats)
    ]


def run_cell(cell: RunCell, config: ExperimentConfig, data, references, out_dir: Path) -> dict:
    """Run one cell and write its artifacts; failures become index entries."""
    entry = {
        "id": cell.cell_id,
        "batch_max": cell.batch_max,
        "mode": cell.mode.value,
        "n_centres": cell.n_centres,
        "repeat": cell.repeat,
        "derived_seed": cell.derived_seed(config.seed),
    }
    cell_seed = cell.derived_seed(config.seed)
    sample_stream = derive_stream(cell_seed, "sample")
    centre_stream = derive_stream(cell_seed, "centres")

    observations = sample_loss_surface(
        config.train_grid, data, MiniBatchPolicy(cell.batch_max), sample_stream
    )
    recipe = FitRecipe(mode=cell.mode, n_centres=cell.n_centres)
    try:
        surrogate = fit_surrogate(observations, recipe, centre_stream)
    except FitFailure as e:
        entry["status"] = "failed"
        entry["error"] = str(e)
        return entry

    surrogate = translate_to_zero(surrogate, config.report_grid.points())
    mse = training_mse(surrogate, observations, cell.mode)
    train_surface = evaluate_surface(surrogate, config.train_grid)
    report_surface = evaluate_surface(surrogate, config.report_grid)
    ref_train, ref_report = references

    cell_dir = out_dir / "cells" / cell.cell_id
    write_observations_csv(observations, cell_dir / "observations.csv")
    write_surface_csv(train_surface, cell_dir / "surface_train.csv")
    write_surface_csv(report_surface, cell_dir / "surface_report.csv")
    write_json(surrogate_json(surrogate, mse), cell_dir / "model.json")
    write_json(
        {
            "cell": {
                "batch_max": cell.batch_max,
                "mode": cell.mode.value,
                "n_centres": cell.n_centres,
                "repeat": cell.repeat,
            },
            "derived_seed": entry["derived_seed"],
            "fit": {"shape": surrogate.params.shape, "training_mse": mse, "offset": surrogate.offset},
            "report_surface": make_report(report_surface, ref_report).as_dict(),
            "train_surface": make_report(train_surface, ref_train).as_dict(),
        },
        cell_dir / "report.json",
    )
    render_heatmap_svg(
        report_surface, cell_dir / "heatmap.svg", marker=locate_min(report_surface)[0]
    )

    entry["status"] = "ok"
    entry["artifacts"] = {
        name.split(".")[0]: f"cells/{cell.cell_id}/{name}" for name in _CELL_FILES
    }
    return entry


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1) -> Path:
    """Run the full study; returns the path of the written index.json."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    data = generate_full_batch(
        config.dataset_n, config.dataset_interval, config.dataset_coefficients
    )

    def oracle(pts):
        return analytic_loss(pts, data)

    ref_train = evaluate_surface(oracle, config.train_grid)
    ref_report = evaluate_surface(oracle, config.report_grid)
    references = (ref_train, ref_report)

    ref_dir = out / "reference"
    write_surface_csv(ref_train, ref_dir / "surface_train.csv")
    write_surface_csv(ref_report, ref_dir / "surface_report.csv")
    write_json(
        {
            "report_surface": make_report(ref_report).as_dict(),
            "train_surface": make_report(ref_train).as_dict(),
        },
        ref_dir / "report.json",
    )
    render_heatmap_svg(ref_report, ref_dir / "heatmap.svg", marker=locate_min(ref_report)[0])

    cells = enumerate_cells(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(
                pool.map(lambda c: run_cell(c, config, data, references, out), cells)
            )
    else:
        entries = [run_cell(c, config, data, references, out) for c in cells]

    index = {
        "config": config.to_mapping(),
        "reference": {
            "surface_train": "reference/surface_train.csv",
            "surface_report": "reference/surface_report.csv",
            "report": "reference/report.json",
            "heatmap": "reference/heatmap.svg",
        },
        "cells": entries,
    }
    index_path = out / "index.json"
    write_json(index, index_path)
    return index_path
