"""Batch experiments: catalog verification, fidelity-error comparisons across
MUB classes, entropy correlations, real-shadow histograms and cross-checks.

Every random draw is addressed by ``RngStream(seed, trial, substream)`` and
work is split into fixed-size chunks, so the output depends only on the
configuration and never on the number of workers.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, fisher
from .catalog import (
    CATALOG_NAMES,
    CatalogParseError,
    RowValidationError,
    StructuralError,
    build_catalog,
    catalog_text,
    classify_basis,
    expected_signature,
    load_catalog,
    parse_catalog,
    verify_unbiasedness,
)
from .checks import run_crosscheck
from .states import FAMILY_CODES, RngStream, StateFamily, canonical_state, random_pure_state

KINDS = ("verify", "fig1", "fig2", "fig3", "shadow", "crosscheck")
DEFAULT_SEED = 0xC0FFEE
CHUNK = 250
SHADOW_CHUNK = 5_000
HIST_BINS = 100
TAIL_MASS = 0.05

# substream offsets; the family code is added so families never share draws
SUB_STATE = 1
SUB_SHADOW = 11

CONVENTIONS = {
    "copies_per_basis": 1,
    "dropped_outcome": "last outcome of each basis",
    "entropy": "sum over bases of Shannon entropy in bits",
    "shadow_measurements": "uniform unit vectors in R^{d(d+1)} (normalized Gaussians)",
    "fig3_binning": f"{HIST_BINS} uniform bins over pooled min-max of both catalogs",
    "fig3_tails": f"Delta P summed over outermost occupied bins holding {TAIL_MASS:.0%} of pooled mass per side",
    "rng": "Philox keyed by (seed, trial index); state and shadow draws on disjoint substreams",
    "projector_order": "sign pattern as n-bit counter, s_i=+1 <-> bit 0, first generator most significant",
}

ENSEMBLES = {
    "GHZ": "U1 x U2 x U3 (|000>+|111>)/sqrt2, Ui Haar on U(2)",
    "W": "U1 x U2 x U3 (|001>+|010>+|100>)/sqrt3, Ui Haar on U(2)",
    "BIPARTITE": "Haar vector on a uniformly chosen qubit pair x Haar qubit",
    "SEPARABLE": "product of three Haar qubits",
}


class InvariantViolation(RuntimeError):
    def __init__(self, invariant: str, detail: str = ""):
        super().__init__(f"invariant violated: {invariant}" + (f" ({detail})" if detail else ""))
        self.invariant = invariant


@dataclass
class ExperimentConfig:
    kind: str
    catalogs: list[str] = field(default_factory=lambda: list(CATALOG_NAMES))
    families: list[str] = field(default_factory=lambda: [f.value for f in StateFamily])
    trials: int = 20_000
    shadow_samples: int = 500_000
    shots: int = 10_000
    seed: int = DEFAULT_SEED
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment {self.kind!r}")
        for name in ("trials", "shadow_samples", "shots", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for c in self.catalogs:
            if c not in CATALOG_NAMES:
                raise ValueError(f"unknown catalog {c!r}; choose from {', '.join(CATALOG_NAMES)}")
        self.families = [StateFamily.parse(f).value for f in self.families]
        if not self.catalogs or not self.families:
            raise ValueError("at least one catalog and one family are required")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class ReportFiles:
    data: list[Path]
    meta: Path
    plots: list[Path] = field(default_factory=list)
    passed: bool = True
    summary: dict = field(default_factory=dict)


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _write_meta(config: ExperimentConfig, out: Path, extra: dict) -> Path:
    meta = {
        "artifact": "mubtomo",
        "artifact_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": config.seed,
        "config": asdict(config),
        "conventions": CONVENTIONS,
        "ensembles": ENSEMBLES,
        **extra,
    }
    path = out / f"{config.kind}_meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_fmt) + "\n", encoding="utf-8")
    return path


# -- per-state work ----------------------------------------------------------


def _state_vectors(seed: int, family: str, start: int, stop: int) -> np.ndarray:
    sub = SUB_STATE + FAMILY_CODES[StateFamily(family)]
    return np.array(
        [random_pure_state(family, RngStream(seed, i, sub).generator()) for i in range(start, stop)]
    )


def _fidelity_chunk(task):
    """Fidelity errors and outcome entropies, shape (2, n_catalogs, stop - start)."""
    seed, family, start, stop, catalogs = task
    psis = _state_vectors(seed, family, start, stop)
    out = np.empty((2, len(catalogs), stop - start))
    for c, name in enumerate(catalogs):
        p = fisher.probability_tables(psis, load_catalog(name))
        dev = np.max(np.abs(p.sum(axis=-1) - 1))
        if dev > fisher.ROW_SUM_TOL:
            raise InvariantViolation("probability rows sum to one", f"deviation {dev:.3g}")
        out[0, c] = fisher.fidelity_errors(p)
        out[1, c] = fisher.outcome_entropies(p)
    return out


def _shadow_chunk(task):
    """Shadow variances for random states, one (state, measurement) draw per sample."""
    seed, family, start, stop, catalogs = task
    code = FAMILY_CODES[StateFamily(family)]
    psis = _state_vectors(seed, family, start, stop)
    d = psis.shape[1]
    z = np.empty((stop - start, d * (d + 1)))
    for k, i in enumerate(range(start, stop)):
        z[k] = RngStream(seed, i, SUB_SHADOW + code).generator().standard_normal(d * (d + 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z = z.reshape(-1, d + 1, d)
    return np.array(
        [fisher.quadratic_errors(z, fisher.probability_tables(psis, load_catalog(c))) for c in catalogs]
    )


def _canonical_shadow_chunk(task):
    seed, family, chunk, count, catalog = task
    p = fisher.probability_tables(canonical_state(family), load_catalog(catalog))[0]
    return fisher.shadow_samples(p, count, RngStream(seed, chunk, SUB_SHADOW + FAMILY_CODES[StateFamily(family)]))


def _chunks(total: int, size: int):
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def per_state_results(config: ExperimentConfig) -> dict[str, np.ndarray]:
    """family -> array (2, n_catalogs, trials) of [fidelity error, entropy]."""
    out = {}
    for fam in config.families:
        tasks = [(config.seed, fam, a, b, tuple(config.catalogs)) for a, b in _chunks(config.trials, CHUNK)]
        out[fam] = np.concatenate(_map(_fidelity_chunk, tasks, config.workers), axis=-1)
    return out


# -- experiments ---------------------------------------------------------------


def run_verify(config: ExperimentConfig, out: Path) -> ReportFiles:
    rows = []
    all_ok = True
    for name in config.catalogs:
        status, dev, sig, labels_ok = "ok", float("nan"), None, False
        try:
            cat = build_catalog(parse_catalog(catalog_text(name)))
            dev = verify_unbiasedness(cat)
            sig = cat.signature
            labels_ok = all(classify_basis(b) == r.declared_label for b, r in zip(cat.bases, cat.rows))
        except (CatalogParseError, RowValidationError, StructuralError) as exc:
            status = f"invalid: {exc}"
        passed = status == "ok" and dev <= 1e-12 and sig == expected_signature(name) and labels_ok
        all_ok &= passed
        rows.append([
            name, status, dev,
            "" if sig is None else "(%d,%d,%d)" % sig,
            "(%d,%d,%d)" % expected_signature(name), labels_ok, passed,
        ])
    data = _write_csv(
        out / "verify.csv",
        ["catalog", "status", "unbiasedness_deviation", "signature", "expected_signature", "labels_match", "passed"],
        rows,
    )
    meta = _write_meta(config, out, {"all_passed": all_ok})
    return ReportFiles([data], meta, passed=all_ok, summary={r[0]: r[3] for r in rows})


def fig1_summary(results: dict[str, np.ndarray], catalogs: list[str]) -> list[list]:
    rows = []
    for fam, arr in results.items():
        err = arr[0]
        for c, name in enumerate(catalogs):
            e = err[c]
            rows.append([name, fam, float(np.mean(e)), float(np.std(e, ddof=1) / np.sqrt(e.size)), e.size])
    return rows


def run_fig1(config: ExperimentConfig, out: Path) -> ReportFiles:
    results = per_state_results(config)
    rows = fig1_summary(results, config.catalogs)
    if any(r[2] < 0 for r in rows):
        raise InvariantViolation("fidelity errors are non-negative")
    data = _write_csv(out / "fig1.csv", ["catalog", "family", "mean", "standard_error", "trials"], rows)
    plots = _plot_fig1(rows, out)
    meta = _write_meta(config, out, {"rows": len(rows)})
    return ReportFiles([data], meta, plots, summary={"rows": rows})


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.corrcoef(x, y)[0, 1])


def run_fig2(config: ExperimentConfig, out: Path) -> ReportFiles:
    results = per_state_results(config)
    state_rows = []
    corr_rows = []
    for fam, arr in results.items():
        for c, name in enumerate(config.catalogs):
            err, ent = arr[0, c], arr[1, c]
            for i in range(err.size):
                state_rows.append([name, fam, i, ent[i], err[i]])
            corr_rows.append([name, fam, pearson(ent, err), float(ent.mean()), float(err.mean()), err.size])
    data = _write_csv(out / "fig2.csv", ["catalog", "family", "trial", "entropy_bits", "fidelity_error"], state_rows)
    corr = _write_csv(
        out / "fig2_correlations.csv",
        ["catalog", "family", "pearson", "mean_entropy_bits", "mean_fidelity_error", "trials"],
        corr_rows,
    )
    plots = _plot_fig2(results, config.catalogs, out)
    meta = _write_meta(config, out, {"rows": len(state_rows)})
    return ReportFiles([data, corr], meta, plots, summary={"correlations": corr_rows})


def shadow_histograms(a: np.ndarray, b: np.ndarray, bins: int = HIST_BINS):
    """Normalized histograms of two sample sets on shared uniform bins."""
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    edges = np.linspace(lo, hi, bins + 1)
    ha = np.histogram(a, edges)[0] / a.size
    hb = np.histogram(b, edges)[0] / b.size
    return edges, ha, hb


def tail_deltas(ha: np.ndarray, hb: np.ndarray, mass: float = TAIL_MASS) -> tuple[float, float]:
    """Sum of ha - hb over the outermost occupied bins holding ``mass`` of the pooled histogram.

    Bins are taken from each end until the pooled mass reaches ``mass``; the
    bin that crosses the threshold is included.
    """
    delta = ha - hb
    pooled = (ha + hb) / 2
    occupied = np.flatnonzero(pooled > 0)
    first, last = occupied[0], occupied[-1]
    left = np.cumsum(pooled[first:])
    right = np.cumsum(pooled[: last + 1][::-1])
    nl = int(np.searchsorted(left, mass)) + 1
    nr = int(np.searchsorted(right, mass)) + 1
    return float(delta[first:first + nl].sum()), float(delta[last - nr + 1:last + 1].sum())


def _two_catalogs(config: ExperimentConfig) -> list[str]:
    cats = [c for c in config.catalogs]
    if len(cats) < 2:
        raise ValueError("fig3 compares two catalogs; pass --catalogs A,B")
    return cats[:2]


def run_fig3(config: ExperimentConfig, out: Path) -> ReportFiles:
    a_name, b_name = _two_catalogs(config)
    data, tails, plots = [], [], []
    hist = {}
    for fam in config.families:
        tasks = [
            (config.seed, fam, s, e, (a_name, b_name)) for s, e in _chunks(config.shadow_samples, SHADOW_CHUNK)
        ]
        samples = np.concatenate(_map(_shadow_chunk, tasks, config.workers), axis=-1)
        if np.any(samples < -1e-12):
            raise InvariantViolation("shadow variances are non-negative")
        edges, ha, hb = shadow_histograms(samples[0], samples[1])
        for h in (ha, hb):
            if abs(h.sum() - 1) > 1e-9:
                raise InvariantViolation("histograms normalized to unity", f"sum {h.sum()!r}")
        rows = [[edges[i], edges[i + 1], ha[i], hb[i], ha[i] - hb[i]] for i in range(len(ha))]
        data.append(
            _write_csv(out / f"fig3_{fam}.csv", ["bin_low", "bin_high", f"P_{a_name}", f"P_{b_name}", "delta"], rows)
        )
        left, right = tail_deltas(ha, hb)
        occ = np.flatnonzero(ha + hb)
        tails.append([
            fam, left, right, (ha - hb)[occ[0]], (ha - hb)[occ[-1]],
            float(samples[0].mean()), float(samples[1].mean()),
            float(samples[0].std()), float(samples[1].std()), samples.shape[1],
        ])
        hist[fam] = (edges, ha - hb)
    data.append(_write_csv(
        out / "fig3_tails.csv",
        ["family", "left_tail_delta", "right_tail_delta", "first_bin_delta", "last_bin_delta",
         f"mean_{a_name}", f"mean_{b_name}", f"std_{a_name}", f"std_{b_name}", "samples"],
        tails,
    ))
    plots = _plot_fig3(hist, a_name, b_name, out)
    meta = _write_meta(config, out, {"compared": [a_name, b_name]})
    return ReportFiles(data, meta, plots, summary={"tails": tails})


def run_shadow(config: ExperimentConfig, out: Path) -> ReportFiles:
    """Real shadows and principal error axes for the canonical state of each family."""
    sample_rows, axis_rows = [], []
    for name in config.catalogs:
        cat = load_catalog(name)
        for fam in config.families:
            tasks = [
                (config.seed, fam, k, e - s, name)
                for k, (s, e) in enumerate(_chunks(config.shadow_samples, SHADOW_CHUNK))
            ]
            samples = np.concatenate(_map(_canonical_shadow_chunk, tasks, config.workers))
            sample_rows.extend([name, fam, i, v] for i, v in enumerate(samples))
            p = fisher.probability_table(np.outer(canonical_state(fam), canonical_state(fam).conj()), cat)
            for block in fisher.fisher_blocks(p):
                axes = fisher.principal_axes(block)
                if abs(axes.eigenvalues[0]) > 1e-12:
                    raise InvariantViolation("zero mode per block", f"smallest eigenvalue {axes.eigenvalues[0]!r}")
                axis_rows.append([name, fam, block.index + 1, *axes.eigenvalues])
    d = 8
    data = [
        _write_csv(out / "shadow.csv", ["catalog", "family", "sample", "variance"], sample_rows),
        _write_csv(
            out / "shadow_axes.csv",
            ["catalog", "family", "basis"] + [f"eigenvalue_{k}" for k in range(d)],
            axis_rows,
        ),
    ]
    meta = _write_meta(config, out, {"samples_per_cell": config.shadow_samples})
    return ReportFiles(data, meta)


def run_crosscheck_experiment(config: ExperimentConfig, out: Path) -> ReportFiles:
    results = run_crosscheck(config.seed, config.shots, config.trials)
    rows = [[r.name, r.value, r.tolerance, r.passed, r.detail] for r in results]
    data = _write_csv(out / "crosscheck.csv", ["check", "value", "tolerance", "passed", "detail"], rows)
    ok = all(r.passed for r in results)
    meta = _write_meta(config, out, {"all_passed": ok, "mix_weight": 0.1})
    failed = [r.name for r in results if not r.passed]
    return ReportFiles([data], meta, passed=ok, summary={"failed": failed})


RUNNERS = {
    "verify": run_verify,
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "shadow": run_shadow,
    "crosscheck": run_crosscheck_experiment,
}


def run_experiment(config: ExperimentConfig) -> ReportFiles:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[config.kind](config, out)


# -- plots ---------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _plot_fig1(rows, out: Path) -> list[Path]:
    plt = _pyplot()
    fams = list(dict.fromkeys(r[1] for r in rows))
    cats = list(dict.fromkeys(r[0] for r in rows))
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(cats)
    for k, c in enumerate(cats):
        vals = [next(r for r in rows if r[0] == c and r[1] == f) for f in fams]
        ax.bar(np.arange(len(fams)) + k * width, [v[2] for v in vals], width,
               yerr=[v[3] for v in vals], label=f"({','.join(c)})")
    ax.set_xticks(np.arange(len(fams)) + 0.4 - width / 2, fams)
    ax.set_ylabel("mean fidelity error (N = 1)")
    ax.legend()
    path = _save(fig, out / "fig1.svg")
    plt.close(fig)
    return [path]


def _plot_fig2(results, catalogs, out: Path) -> list[Path]:
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(results), figsize=(5 * len(results), 4), squeeze=False)
    for ax, (fam, arr) in zip(axes[0], results.items()):
        for c, name in enumerate(catalogs):
            ax.scatter(arr[1, c], arr[0, c], s=2, alpha=0.4, label=f"({','.join(name)})")
        ax.set_title(fam)
        ax.set_xlabel("outcome entropy (bits)")
        ax.set_ylabel("fidelity error")
        ax.legend(markerscale=4)
    path = _save(fig, out / "fig2.svg")
    plt.close(fig)
    return [path]


def _plot_fig3(hist, a_name, b_name, out: Path) -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    for fam, (edges, delta) in hist.items():
        ax.step(edges[:-1], delta, where="post", label=fam)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("variance")
    ax.set_ylabel(f"P({a_name}) - P({b_name})")
    ax.legend()
    path = _save(fig, out / "fig3.svg")
    plt.close(fig)
    return [path]
