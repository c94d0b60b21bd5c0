"""
Haar-Ruelle Lab - Result Persistence
Writes eigenpairs, measures, histograms and verification reports to an output directory.
"""

import csv
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence

from eigensolver import CylinderMeasure, EigenResult, Histogram
from operators import DepthFunction
from symbolic import all_words

logger = logging.getLogger(__name__)

HISTOGRAM_COLUMNS = ['beta', 'cylinder', 't', 'mass_ratio_iteration', 'mass_oracle', 'abs_diff']

PLOT_SCRIPT = '''"""Plot the cylinder histograms written next to this script (requires matplotlib)."""

import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
BETAS = {betas!r}


def load(beta):
    with open(os.path.join(HERE, "histogram_beta" + beta + ".csv")) as f:
        return list(csv.DictReader(f))


def main():
    fig, axes = plt.subplots(len(BETAS), 1, figsize=(8, 3 * len(BETAS)), squeeze=False)
    for ax, beta in zip(axes[:, 0], BETAS):
        rows = load(beta)
        masses = [float(r["mass_ratio_iteration"]) for r in rows]
        if "t" in rows[0]:
            ax.bar([float(r["t"]) for r in rows], masses, width=1.0 / (2 * len(rows)))
            ax.set_xlabel("t")
        else:
            ax.bar(range(len(rows)), masses)
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels([r["cylinder"] for r in rows], rotation=90)
        ax.set_title("beta = " + beta)
        ax.set_ylabel("mass")
    fig.tight_layout()
    plt.show()


if __name__ == "__main__":
    main()
'''


def format_beta(beta: float) -> str:
    """Short label for beta; falls back to repr when %g would not round-trip."""
    text = f"{beta:g}"
    return text if float(text) == beta else repr(float(beta))


def format_float(value: float) -> str:
    """Shortest repr that round-trips the float."""
    return repr(float(value))


def _word_labels(alphabet, depth: int) -> List[str]:
    return [",".join(str(a) for a in w) for w in all_words(alphabet, depth)]


class ResultWriter:
    """Persists experiment results as CSV, JSON and plain text."""

    def __init__(self, directory: str):
        """Initialize the writer, creating the output directory."""
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.written: List[str] = []

    def path(self, name: str) -> str:
        """Full path of a result file."""
        return os.path.join(self.directory, name)

    def _record(self, name: str) -> str:
        self.written.append(name)
        logger.debug("wrote %s", self.path(name))
        return self.path(name)

    def write_json(self, name: str, data: Dict[str, Any]) -> str:
        """Write data as sorted JSON and record the file."""
        try:
            with open(self.path(name), 'w') as f:
                json.dump(data, f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            logger.error("error saving %s: %s", name, e)
            raise
        return self._record(name)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """Write a CSV with a header row and record the file."""
        try:
            with open(self.path(name), 'w', newline='') as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            logger.error("error saving %s: %s", name, e)
            raise
        return self._record(name)

    def write_text(self, name: str, text: str) -> str:
        """Write plain text and record the file."""
        try:
            with open(self.path(name), 'w') as f:
                f.write(text)
        except OSError as e:
            logger.error("error saving %s: %s", name, e)
            raise
        return self._record(name)

    def write_measure(self, beta: float, measure: CylinderMeasure) -> str:
        """measure_beta<b>.csv: one mass per cylinder."""
        labels = _word_labels(measure.alphabet, measure.depth)
        return self.write_csv(f"measure_beta{format_beta(beta)}.csv", ['cylinder', 'value'],
                              ([label, format_float(m)] for label, m in zip(labels, measure.masses)))

    def write_eigenfunction(self, beta: float, h: DepthFunction) -> str:
        """eigenfunction_beta<b>.csv: one value per cylinder."""
        labels = _word_labels(h.alphabet, h.depth)
        return self.write_csv(f"eigenfunction_beta{format_beta(beta)}.csv", ['cylinder', 'value'],
                              ([label, format_float(v)] for label, v in zip(labels, h.values)))

    def write_eigen(self, beta: float, result: EigenResult, tolerance: float) -> str:
        """eigen_beta<b>.json: eigenvalues, residual and primitivity."""
        return self.write_json(f"eigen_beta{format_beta(beta)}.json", {
            'beta': beta,
            'eigenvalue': result.eigenvalue,
            'rho': result.rho,
            'lambda': result.lam,
            'log_eigenvalue': result.log_eigenvalue,
            'residual': result.residual,
            'iterations': result.iterations,
            'primitive': result.primitive,
            'tolerance': tolerance,
            'passed': result.residual <= tolerance,
        })

    def write_histogram(self, hist: Histogram) -> str:
        """histogram_beta<b>.csv, without the t column when d > 2."""
        with_t = hist.rows[0].t is not None
        header = HISTOGRAM_COLUMNS if with_t else [c for c in HISTOGRAM_COLUMNS if c != 't']
        rows = []
        for row in hist.rows:
            values = [format_beta(row.beta), row.label]
            if with_t:
                values.append(format_float(row.t))
            values += [format_float(row.mass_ratio_iteration), format_float(row.mass_oracle),
                       format_float(row.abs_diff)]
            rows.append(values)
        return self.write_csv(f"histogram_beta{format_beta(hist.beta)}.csv", header, rows)

    def write_bars(self, hist: Histogram, width: int) -> str:
        """histogram_beta<b>.txt: one bar per cylinder."""
        peak = max(row.mass_ratio_iteration for row in hist.rows) or 1.0
        label_width = max(len(row.label) for row in hist.rows)
        lines = [f"beta = {format_beta(hist.beta)}  total mass = {hist.total:.12f}"]
        for row in hist.rows:
            bar = "#" * int(round(width * row.mass_ratio_iteration / peak))
            where = f"t={row.t:.6f} " if row.t is not None else ""
            lines.append(f"{row.label:>{label_width}} {where}{row.mass_ratio_iteration:.6e} |{bar}")
        return self.write_text(f"histogram_beta{format_beta(hist.beta)}.txt", "\n".join(lines) + "\n")

    def write_plot_script(self, betas: Sequence[float]) -> str:
        """plot_histogram.py for the given betas."""
        return self.write_text("plot_histogram.py",
                               PLOT_SCRIPT.format(betas=[format_beta(b) for b in betas]))

    def write_verify(self, data: Dict[str, Any]) -> str:
        """verify.json."""
        return self.write_json("verify.json", data)


def load_histogram(path: str) -> List[Dict[str, Any]]:
    """Read a histogram CSV back, converting the numeric columns."""
    rows = []
    with open(path, newline='') as f:
        for record in csv.DictReader(f):
            entry: Dict[str, Any] = {'cylinder': record['cylinder']}
            for key in ('beta', 't', 'mass_ratio_iteration', 'mass_oracle', 'abs_diff'):
                if key in record:
                    entry[key] = float(record[key])
            rows.append(entry)
    return rows
