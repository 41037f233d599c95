"""Pipeline orchestration and report artifacts."""
import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .advisor import (
    DistributionTable,
    GradeMap,
    InternalWeights,
    band_distribution,
    gpa_to_letter,
    internal_score,
    new_grade,
    recommend,
)
from .dtree import TrainingView, build_tree, classify, export_tree
from .errors import ConfigError, EmptyDataset, GpaOutsideEdges, GrademinerError, InputError, InvariantViolation
from .kmeans import ClusterModel, KMeansConfig, fit_best
from .records import (
    ATTENDANCE_MAX,
    ATTRIBUTES,
    BAND_ORDER,
    CT_MAX,
    GPA_MAX,
    BandSpec,
    Dataset,
    DiscretizationSpec,
    discretize,
    format_gpa,
    gpa_to_band,
    load_csv,
)

DEFAULT_EDGES = (2.00, 2.20, 3.00, 3.32, 3.56, 4.00)
CLUSTER_FEATURES = ("gpa", "ct", "attendance")
SCORE_BASES = ("gpa", "new_grade")
OUTPUT_FILES = ("report.txt", "report.json", "tree.json", "scatter.csv", "histogram.csv", "bands.csv")


@dataclass(frozen=True)
class PipelineConfig:
    input_path: Optional[str] = None
    output_dir: Optional[str] = None
    band_spec: BandSpec = field(default_factory=BandSpec)
    histogram_edges: Tuple[float, ...] = DEFAULT_EDGES
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)
    n_init: int = 10
    cluster_features: Tuple[str, ...] = ("gpa",)
    discretization: DiscretizationSpec = field(default_factory=DiscretizationSpec)
    weights: InternalWeights = field(default_factory=InternalWeights)
    alpha: float = 0.5
    grade_map: GradeMap = field(default_factory=GradeMap)
    # "new_grade" bands and grades students on the blended grade instead of raw GPA
    score_basis: str = "gpa"

    def __post_init__(self):
        try:
            edges = tuple(float(e) for e in self.histogram_edges)
        except (TypeError, ValueError):
            raise ConfigError("histogram_edges must be a list of numbers") from None
        object.__setattr__(self, "histogram_edges", edges)
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ConfigError("histogram_edges must hold at least two strictly increasing values")
        feats = tuple(self.cluster_features)
        object.__setattr__(self, "cluster_features", feats)
        if not feats or any(f not in CLUSTER_FEATURES for f in feats) or len(set(feats)) != len(feats):
            raise ConfigError(f"cluster_features must be distinct names from {CLUSTER_FEATURES}")
        if isinstance(self.n_init, bool) or not isinstance(self.n_init, int) or self.n_init < 1:
            raise ConfigError(f"n_init must be a positive integer, got {self.n_init!r}")
        if not isinstance(self.alpha, (int, float)) or not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.score_basis not in SCORE_BASES:
            raise ConfigError(f"score_basis must be one of {SCORE_BASES}")

    # -- JSON mapping ----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "input_path", "output_dir", "band_spec", "histogram_edges", "kmeans",
            "discretization", "weights", "alpha", "grade_map", "score_basis",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw = {}
        try:
            for key in ("input_path", "output_dir", "alpha", "score_basis"):
                if key in data:
                    kw[key] = data[key]
            if "band_spec" in data:
                kw["band_spec"] = BandSpec(**data["band_spec"])
            if "histogram_edges" in data:
                kw["histogram_edges"] = tuple(data["histogram_edges"])
            if "kmeans" in data:
                km = dict(data["kmeans"])
                if "n_init" in km:
                    kw["n_init"] = km.pop("n_init")
                if "features" in km:
                    kw["cluster_features"] = tuple(km.pop("features"))
                kw["kmeans"] = KMeansConfig(**km)
            if "discretization" in data:
                kw["discretization"] = DiscretizationSpec(**data["discretization"])
            if "weights" in data:
                kw["weights"] = InternalWeights(**data["weights"])
            if "grade_map" in data:
                kw["grade_map"] = GradeMap(tuple(tuple(e) for e in data["grade_map"]))
        except TypeError as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self, include_paths=True) -> dict:
        d = {
            "band_spec": {"high_min": self.band_spec.high_min, "low_max": self.band_spec.low_max},
            "histogram_edges": list(self.histogram_edges),
            "kmeans": {
                "k": self.kmeans.k,
                "seed": self.kmeans.seed,
                "max_iters": self.kmeans.max_iters,
                "epsilon": self.kmeans.epsilon,
                "n_init": self.n_init,
                "features": list(self.cluster_features),
            },
            "discretization": {
                "ct_bins": [list(b) for b in self.discretization.ct_bins],
                "attendance_bins": [list(b) for b in self.discretization.attendance_bins],
            },
            "weights": dict(zip(
                ("w_ct", "w_attendance", "w_assignment", "w_lab", "w_quiz"),
                self.weights.as_tuple(),
            )),
            "alpha": self.alpha,
            "grade_map": [list(e) for e in self.grade_map.entries],
            "score_basis": self.score_basis,
        }
        if include_paths:
            d = {"input_path": self.input_path, "output_dir": self.output_dir, **d}
        return d


@dataclass(frozen=True)
class StudentRow:
    roll: int
    gpa: float
    band: str
    cluster: int
    letter: str
    new_grade: float
    internal_score: float
    predicted_band: str
    step_id: str


@dataclass(frozen=True)
class Report:
    distribution_five_class: DistributionTable
    distribution_bands: DistributionTable
    cluster_summary: dict
    tree: str
    per_student: Tuple[StudentRow, ...]
    scatter: Tuple[Tuple[int, float], ...]
    config: dict

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "config": self.config,
            "distribution_five_class": self.distribution_five_class.to_list(),
            "distribution_bands": self.distribution_bands.to_list(),
            "clusters": self.cluster_summary,
            "tree": json.loads(self.tree),
            "per_student": [vars(r) for r in self.per_student],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


# -- graph series ------------------------------------------------------------

def scatter_series(ds: Dataset) -> List[Tuple[int, float]]:
    """(attendance, gpa) per student, in input order."""
    if ds is None or not len(ds):
        raise EmptyDataset("scatter series of an empty dataset")
    return [(r.attendance, r.gpa) for r in ds.records]


def edge_label(lo: float, hi: float) -> str:
    return f"{lo:.2f}-{hi:.2f}"


def histogram_counts(values: Sequence[float], edges: Sequence[float]) -> List[int]:
    """Counts per ``[e_i, e_{i+1})``; the last interval also takes its upper edge."""
    edges = list(edges)
    counts = [0] * (len(edges) - 1)
    for v in values:
        if v < edges[0] or v > edges[-1]:
            raise GpaOutsideEdges(f"value {v} lies outside the edges [{edges[0]}, {edges[-1]}]")
        i = len(edges) - 2
        for j in range(len(edges) - 1):
            if v < edges[j + 1]:
                i = j
                break
        counts[i] += 1
    return counts


def histogram_series(ds: Dataset, edges: Sequence[float] = DEFAULT_EDGES) -> DistributionTable:
    if ds is None or not len(ds):
        raise EmptyDataset("histogram of an empty dataset")
    edges = tuple(float(e) for e in edges)
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ConfigError("edges must hold at least two strictly increasing values")
    counts = histogram_counts(ds.gpas, edges)
    labels = [edge_label(lo, hi) for lo, hi in zip(edges, edges[1:])]
    return band_distribution(list(zip(labels, counts)))


# -- pipeline ----------------------------------------------------------------

def cluster_points(ds: Dataset, features: Sequence[str]) -> np.ndarray:
    """Feature matrix for clustering; GPA alone stays on its own scale."""
    if tuple(features) == ("gpa",):
        return np.array(ds.gpas, dtype=np.float64).reshape(-1, 1)
    scale = {"gpa": GPA_MAX, "ct": CT_MAX, "attendance": ATTENDANCE_MAX}
    cols = [[getattr(r, f) / scale[f] for r in ds.records] for f in features]
    return np.array(cols, dtype=np.float64).T.copy()


def summarize_clusters(model: ClusterModel, features: Sequence[str]) -> dict:
    sizes = model.sizes()
    # rank 1 = highest centroid (mean over coordinates)
    order = sorted(range(model.k), key=lambda c: (-float(model.centroids[c].mean()), c))
    rank = {c: i + 1 for i, c in enumerate(order)}
    tiers = [b.value for b in BAND_ORDER] if model.k == 3 else None
    clusters = []
    for c in range(model.k):
        entry = {
            "index": c,
            "centroid": [float(x) for x in model.centroids[c]],
            "size": int(sizes[c]),
            "rank": rank[c],
        }
        if tiers:
            entry["tier"] = tiers[rank[c] - 1]
        clusters.append(entry)
    return {
        "features": list(features),
        "k": model.k,
        "sse": float(model.sse),
        "iterations": model.iterations,
        "converged": model.converged,
        "clusters": clusters,
    }


def run_cluster(ds: Dataset, cfg: PipelineConfig) -> ClusterModel:
    return fit_best(cluster_points(ds, cfg.cluster_features), cfg.kmeans, n_init=cfg.n_init)


def run_tree(ds: Dataset, cfg: PipelineConfig):
    cat = discretize(ds, cfg.discretization, cfg.band_spec)
    return cat, build_tree(TrainingView(tuple(cat), ATTRIBUTES))


def advise_rows(ds: Dataset, cfg: PipelineConfig):
    """(record, internal score, new grade, score used for grading, letter, recommendation)."""
    out = []
    for r in ds.records:
        internal = internal_score(r, cfg.weights)
        ng = new_grade(r.gpa, internal, cfg.alpha)
        score = ng if cfg.score_basis == "new_grade" else r.gpa
        letter = gpa_to_letter(score, cfg.grade_map)
        out.append((r, internal, ng, score, letter, recommend(letter, cfg.grade_map)))
    return out


def build_report(ds: Dataset, cfg: PipelineConfig) -> Report:
    """Run every stage on an already-loaded dataset."""
    five = histogram_series(ds, cfg.histogram_edges)
    model = run_cluster(ds, cfg)
    cat, tree = run_tree(ds, cfg)

    rows = []
    for (r, internal, ng, score, letter, rec), c, cr in zip(advise_rows(ds, cfg), model.assignment, cat):
        rows.append(StudentRow(
            roll=r.roll,
            gpa=r.gpa,
            band=gpa_to_band(score, cfg.band_spec).value,
            cluster=int(c),
            letter=letter,
            new_grade=ng,
            internal_score=internal,
            predicted_band=classify(tree, cr).value,
            step_id=rec.step_id,
        ))
    band_tally = {b.value: 0 for b in BAND_ORDER}
    for row in rows:
        band_tally[row.band] += 1
    bands = band_distribution(list(band_tally.items()))

    report = Report(
        distribution_five_class=five,
        distribution_bands=bands,
        cluster_summary=summarize_clusters(model, cfg.cluster_features),
        tree=export_tree(tree),
        per_student=tuple(rows),
        scatter=tuple(scatter_series(ds)),
        config=cfg.to_dict(include_paths=False),
    )
    check_report(report, ds)
    return report


def check_report(report: Report, ds: Dataset) -> None:
    n = len(ds)
    if len(report.per_student) != n:
        raise InvariantViolation("per-student rows do not match the input records")
    if report.distribution_bands.total != n or report.distribution_five_class.total != n:
        raise InvariantViolation("distribution totals do not match the dataset size")
    if sum(c["size"] for c in report.cluster_summary["clusters"]) != n:
        raise InvariantViolation("cluster sizes do not sum to the dataset size")


def run_pipeline(cfg: PipelineConfig) -> Report:
    """Load ``cfg.input_path``, build the report and, if ``cfg.output_dir`` is set, write it.

    Nothing is written unless every stage succeeds.
    """
    if not cfg.input_path:
        raise ConfigError("no input path configured")
    try:
        ds = load_csv(cfg.input_path)
    except OSError as exc:
        raise InputError(f"{cfg.input_path}: cannot read input: {exc.strerror}") from None
    try:
        report = build_report(ds, cfg)
    except GrademinerError as exc:
        if not str(exc).startswith(str(cfg.input_path)):
            exc.args = (f"{cfg.input_path}: {exc}",)
        raise
    if cfg.output_dir:
        write_outputs(report, cfg.output_dir)
    return report


# -- rendering ---------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def distribution_csv(table: DistributionTable) -> str:
    return _csv_text(
        ("class", "count", "percentage"),
        [(r.label, r.count, f"{r.percentage:.2f}") for r in table.rows],
    )


def scatter_csv(report: Report) -> str:
    return _csv_text(
        ("roll", "attendance", "gpa"),
        [(row.roll, att, format_gpa(gpa)) for row, (att, gpa) in zip(report.per_student, report.scatter)],
    )


def _table(header, rows) -> List[str]:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def render_text(report: Report) -> str:
    from .advisor import EFFORT_TEXT, STEP_GRADES

    out = [f"grademiner {__version__} report", ""]
    out.append("Students per GPA range")
    out += _table(("Class", "GPA", "No of student", "Percentage"),
                  [(i + 1, r.label, r.count, f"{r.percentage:.2f}")
                   for i, r in enumerate(report.distribution_five_class.rows)])
    out += ["", "Students per band"]
    out += _table(("Class", "No of student", "Percentage"),
                  [(r.label, r.count, f"{r.percentage:.2f}") for r in report.distribution_bands.rows])

    cs = report.cluster_summary
    out += ["", f"K-means on {', '.join(cs['features'])}: k={cs['k']}, sse={cs['sse']:.6f}, "
                f"iterations={cs['iterations']}, converged={cs['converged']}"]
    out += _table(("Cluster", "Centroid", "Size", "Rank"),
                  [(c["index"], ", ".join(f"{x:.4f}" for x in c["centroid"]), c["size"],
                    c["rank"] if "tier" not in c else f"{c['rank']} ({c['tier']})")
                   for c in cs["clusters"]])

    out += ["", "Decision tree", report.tree]

    out += ["", "Per student"]
    out += _table(("Roll", "GPA", "Band", "Predicted", "Cluster", "Letter", "New grade", "Step"),
                  [(r.roll, format_gpa(r.gpa), r.band, r.predicted_band, r.cluster, r.letter,
                    f"{r.new_grade:.2f}", r.step_id) for r in report.per_student])

    out += ["", "Effort steps"]
    out += _table(("Step", "Grade", "Effort"),
                  [(s, STEP_GRADES[s], EFFORT_TEXT[s]) for s in sorted(EFFORT_TEXT)])
    return "\n".join(out) + "\n"


def render_outputs(report: Report) -> Dict[str, str]:
    return {
        "report.txt": render_text(report),
        "report.json": report.to_json(),
        "tree.json": report.tree + "\n",
        "scatter.csv": scatter_csv(report),
        "histogram.csv": distribution_csv(report.distribution_five_class),
        "bands.csv": distribution_csv(report.distribution_bands),
    }


def write_outputs(report: Report, output_dir) -> Dict[str, Path]:
    """Write every artifact; each file is replaced atomically."""
    files = render_outputs(report)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, out / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written[name] = out / name
    return written


def with_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    """Apply CLI-style overrides (``None`` means keep the config value)."""
    km = {k: overrides.pop(k) for k in ("k", "seed", "max_iters", "epsilon") if k in overrides}
    km = {k: v for k, v in km.items() if v is not None}
    kw = {k: v for k, v in overrides.items() if v is not None}
    if km:
        kw["kmeans"] = replace(cfg.kmeans, **km)
    return replace(cfg, **kw) if kw else cfg
