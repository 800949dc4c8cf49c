"""Figure rendering for the harness CSVs.

Read-only over the CSV schemas emitted by the experiment CLI: no statistic is
recomputed here; every annotated value is read or arg-selected straight from
the rows. Two figure kinds:

* fig1 — mean RMSE against particle count, one line per propagation variance
  (sweep-particles schema);
* fig2 — mean RMSE and mean RMSD against the propagation variance, with a
  reference line at the true variance 1.0 and each curve's argmin annotated
  (sweep-q schema).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

SCHEMAS = {
    "fig1": ("n_particles", "q_prop", "mean_rmse", "se_rmse", "mean_rmsd",
             "se_rmsd", "mean_ess", "mean_unique_frac", "trials", "seed"),
    "fig2": ("q_prop", "mean_rmse", "se_rmse", "mean_rmsd", "se_rmsd",
             "mean_ess", "mean_unique_frac", "trials", "seed"),
}

TRUE_VARIANCE = 1.0


class SchemaError(Exception):
    """Input CSV does not match the expected report schema."""


@dataclass
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {sorted(SCHEMAS)}")


def load_rows(path: str, kind: str) -> list[dict]:
    expected = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(expected)}") from None
        if header != expected:
            missing = set(expected) - set(header)
            extra = set(header) - set(expected)
            raise SchemaError(
                f"{path}: column mismatch for {kind}: "
                f"missing {sorted(missing) or 'none'}, "
                f"unexpected {sorted(extra) or 'none'}, "
                f"expected order {','.join(expected)}")
        rows = [{col: float(value) for col, value in zip(header, line)}
                for line in reader if line]
    if not rows:
        raise SchemaError(f"{path}: no data rows under the header")
    return rows


def _argmin_row(rows: list[dict], column: str) -> dict:
    best = rows[0]
    for row in rows[1:]:
        if row[column] < best[column]:
            best = row
    return best


def _render_fig1(rows: list[dict], ax) -> dict[str, str]:
    by_q: dict[float, list[dict]] = {}
    for row in rows:
        by_q.setdefault(row["q_prop"], []).append(row)
    for q, series in sorted(by_q.items()):
        series.sort(key=lambda r: r["n_particles"])
        ns = [r["n_particles"] for r in series]
        means = [r["mean_rmse"] for r in series]
        errs = [r["se_rmse"] for r in series]
        ax.errorbar(ns, means, yerr=errs, marker="o", capsize=3,
                    label=f"propagation variance {q:g}")
    ax.set_xlabel("number of particles")
    ax.set_ylabel("mean RMSE")
    ax.legend()
    return {"series": ", ".join(f"{q:g}" for q in sorted(by_q))}


def _render_fig2(rows: list[dict], ax) -> dict[str, str]:
    rows = sorted(rows, key=lambda r: r["q_prop"])
    qs = [r["q_prop"] for r in rows]
    rmse_best = _argmin_row(rows, "mean_rmse")
    rmsd_best = _argmin_row(rows, "mean_rmsd")

    ax.errorbar(qs, [r["mean_rmse"] for r in rows],
                yerr=[r["se_rmse"] for r in rows], marker="o", capsize=2,
                color="tab:blue", label="mean RMSE")
    ax.set_xlabel("propagation variance used by the filter")
    ax.set_ylabel("mean RMSE", color="tab:blue")
    twin = ax.twinx()
    twin.errorbar(qs, [r["mean_rmsd"] for r in rows],
                  yerr=[r["se_rmsd"] for r in rows], marker="s", capsize=2,
                  color="tab:green", label="mean RMSD")
    twin.set_ylabel("mean RMSD", color="tab:green")

    ax.axvline(TRUE_VARIANCE, color="red", linestyle="--",
               label="true variance 1.0")
    annotations = {
        "rmse_argmin": f"RMSE argmin at Q={rmse_best['q_prop']:g}",
        "rmsd_argmin": f"RMSD argmin at Q={rmsd_best['q_prop']:g}",
    }
    ax.annotate(annotations["rmse_argmin"],
                xy=(rmse_best["q_prop"], rmse_best["mean_rmse"]),
                xytext=(0, 18), textcoords="offset points",
                color="tab:blue", ha="center",
                arrowprops={"arrowstyle": "->", "color": "tab:blue"})
    twin.annotate(annotations["rmsd_argmin"],
                  xy=(rmsd_best["q_prop"], rmsd_best["mean_rmsd"]),
                  xytext=(0, -24), textcoords="offset points",
                  color="tab:green", ha="center",
                  arrowprops={"arrowstyle": "->", "color": "tab:green"})
    handles, labels = ax.get_legend_handles_labels()
    handles2, labels2 = twin.get_legend_handles_labels()
    ax.legend(handles + handles2, labels + labels2, loc="upper center")
    return annotations


def render(spec: FigureSpec) -> dict[str, str]:
    """Render the figure and return its annotation strings."""
    rows = load_rows(spec.csv_path, spec.kind)
    fig, ax = plt.subplots(figsize=(7.5, 5))
    try:
        if spec.kind == "fig1":
            annotations = _render_fig1(rows, ax)
        else:
            annotations = _render_fig2(rows, ax)
        if spec.title:
            ax.set_title(spec.title)
        if spec.xlabel:
            ax.set_xlabel(spec.xlabel)
        if spec.ylabel:
            ax.set_ylabel(spec.ylabel)
        fig.tight_layout()
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return annotations


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots/render",
        description="Render harness sweep CSVs as figures")
    parser.add_argument("--kind", choices=sorted(SCHEMAS), required=True)
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="sweep CSV produced by the experiment CLI")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image (any matplotlib-supported format)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(csv_path=args.csv_path, kind=args.kind,
                      out_path=args.out_path, title=args.title,
                      xlabel=args.xlabel, ylabel=args.ylabel)
    try:
        annotations = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 1
    for text in annotations.values():
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
