"""Student records: ingestion, validation, GPA banding and discretization."""
import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .errors import (
    DuplicateRoll,
    EmptyDataset,
    InvalidSpec,
    MalformedRow,
    OutOfRange,
    RangeViolation,
    UnknownEnumValue,
)

COLUMNS = ("roll", "gpa", "ct", "attendance", "assignment", "lab_per", "quiz")
LAB_VALUES = ("good", "avg", "bad")
CT_MAX = 20
ATTENDANCE_MAX = 10
GPA_MAX = 4.0

# order of the categorical attributes handed to the tree builder
ATTRIBUTES = ("ct_band", "attendance_band", "assignment", "lab_per", "quiz")


class Band(str, Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    def __str__(self):
        return self.value


# High < Medium < Low is the tie-break order used throughout
BAND_ORDER = (Band.HIGH, Band.MEDIUM, Band.LOW)
# Low < Medium < High as GPA increases
BAND_RANK = {Band.LOW: 0, Band.MEDIUM: 1, Band.HIGH: 2}


@dataclass(frozen=True)
class StudentRecord:
    roll: int
    gpa: float
    ct: int
    attendance: int
    assignment: bool
    lab_per: str
    quiz: bool

    def __post_init__(self):
        if isinstance(self.roll, bool) or not isinstance(self.roll, int) or self.roll < 1:
            raise RangeViolation(f"roll must be a positive integer, got {self.roll!r}")
        if isinstance(self.gpa, bool) or not (isinstance(self.gpa, (int, float)) and math.isfinite(self.gpa)):
            raise RangeViolation(f"gpa must be a finite number, got {self.gpa!r}")
        object.__setattr__(self, "gpa", float(self.gpa))
        if not 0.0 <= self.gpa <= GPA_MAX:
            raise RangeViolation(f"gpa {self.gpa} outside [0.00, 4.00]")
        _check_int("ct", self.ct, CT_MAX)
        _check_int("attendance", self.attendance, ATTENDANCE_MAX)
        if self.lab_per not in LAB_VALUES:
            raise UnknownEnumValue(f"lab_per {self.lab_per!r} not in {LAB_VALUES}")
        for name in ("assignment", "quiz"):
            if not isinstance(getattr(self, name), bool):
                raise UnknownEnumValue(f"{name} must be a boolean")


def _check_int(name, value, upper):
    if isinstance(value, bool) or not isinstance(value, int):
        raise RangeViolation(f"{name} must be an integer, got {value!r}")
    if not 0 <= value <= upper:
        raise RangeViolation(f"{name} {value} outside [0, {upper}]")


@dataclass(frozen=True)
class Dataset:
    records: Tuple[StudentRecord, ...]
    source_name: str = "<memory>"

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise EmptyDataset("dataset has no records", source=self.source_name)
        seen = set()
        for r in self.records:
            if r.roll in seen:
                raise DuplicateRoll(f"duplicate roll {r.roll}", source=self.source_name)
            seen.add(r.roll)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def gpas(self) -> List[float]:
        return [r.gpa for r in self.records]


@dataclass(frozen=True)
class BandSpec:
    high_min: float = 3.50
    low_max: float = 2.20

    def __post_init__(self):
        if not 0.0 <= self.low_max < self.high_min <= GPA_MAX:
            raise InvalidSpec(
                f"band thresholds need 0 <= low_max < high_min <= 4, "
                f"got low_max={self.low_max}, high_min={self.high_min}"
            )


Bins = Tuple[Tuple[int, str], ...]


@dataclass(frozen=True)
class DiscretizationSpec:
    """Upper-inclusive integer bins for CT marks and attendance."""

    ct_bins: Bins = ((6, "low"), (12, "mid"), (20, "high"))
    attendance_bins: Bins = ((4, "low"), (7, "mid"), (10, "high"))

    def __post_init__(self):
        object.__setattr__(self, "ct_bins", _freeze_bins(self.ct_bins))
        object.__setattr__(self, "attendance_bins", _freeze_bins(self.attendance_bins))
        _validate_bins("ct_bins", self.ct_bins, CT_MAX)
        _validate_bins("attendance_bins", self.attendance_bins, ATTENDANCE_MAX)


def _freeze_bins(bins) -> Bins:
    try:
        return tuple((int(ub), str(label)) for ub, label in bins)
    except (TypeError, ValueError) as exc:
        raise InvalidSpec(f"bins must be (upper_bound, label) pairs: {exc}") from None


def _validate_bins(name, bins, top):
    if not bins:
        raise InvalidSpec(f"{name} is empty")
    bounds = [ub for ub, _ in bins]
    if any(b >= a for b, a in zip(bounds, bounds[1:])) or bounds[0] < 0:
        raise InvalidSpec(f"{name} upper bounds must be non-negative and strictly increasing")
    if bounds[-1] < top:
        raise InvalidSpec(f"{name} must cover up to {top}, last bound is {bounds[-1]}")
    labels = [label for _, label in bins]
    if len(set(labels)) != len(labels):
        raise InvalidSpec(f"{name} labels must be distinct")


@dataclass(frozen=True)
class CategoricalRecord:
    roll: int
    attributes: Mapping[str, str]
    class_label: Band


# -- ingestion -------------------------------------------------------------

def _parse_int(text, name, line):
    try:
        return int(text)
    except ValueError:
        raise MalformedRow(f"{name}: cannot parse {text!r} as an integer", line) from None


def _parse_flag(text, name, line):
    v = text.upper()
    if v not in ("Y", "N"):
        raise UnknownEnumValue(f"{name}: expected Y or N, got {text!r}", line)
    return v == "Y"


def _build_record(cells: Dict[str, str], line: int) -> StudentRecord:
    for name in COLUMNS:
        if cells[name] == "":
            raise MalformedRow(f"missing value for {name}", line)
    try:
        gpa = float(cells["gpa"])
    except ValueError:
        raise MalformedRow(f"gpa: cannot parse {cells['gpa']!r} as a number", line) from None
    roll = _parse_int(cells["roll"], "roll", line)
    ct = _parse_int(cells["ct"], "ct", line)
    attendance = _parse_int(cells["attendance"], "attendance", line)
    assignment = _parse_flag(cells["assignment"], "assignment", line)
    quiz = _parse_flag(cells["quiz"], "quiz", line)
    lab = cells["lab_per"].lower()
    if lab not in LAB_VALUES:
        raise UnknownEnumValue(f"lab_per: {cells['lab_per']!r} not one of {', '.join(LAB_VALUES)}", line)
    try:
        return StudentRecord(roll, gpa, ct, attendance, assignment, lab, quiz)
    except (RangeViolation, UnknownEnumValue) as exc:
        raise type(exc)(exc.detail, line) from None


def parse_csv(text: Union[str, Iterable[str], io.TextIOBase], source_name: str = "<input>") -> Dataset:
    """Parse student CSV text or a file object into a :class:`Dataset`.

    The header must name the seven columns (any order, case-insensitive).
    Every error carries the 1-based line number of the offending row.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        try:
            header = next(reader)
            while not any(c.strip() for c in header):
                header = next(reader)
        except StopIteration:
            raise EmptyDataset("input is empty") from None
        names = [h.strip().lower() for h in header]
        missing = [c for c in COLUMNS if c not in names]
        if missing or len(names) != len(COLUMNS) or len(set(names)) != len(names):
            raise MalformedRow(
                f"header must name exactly the columns {', '.join(COLUMNS)}; got {', '.join(names)}",
                reader.line_num,
            )

        records = []
        seen = {}
        for row in reader:
            if not any(c.strip() for c in row):
                continue
            line = reader.line_num
            if len(row) != len(names):
                raise MalformedRow(f"expected {len(names)} columns, found {len(row)}", line)
            rec = _build_record({n: c.strip() for n, c in zip(names, row)}, line)
            if rec.roll in seen:
                raise DuplicateRoll(f"roll {rec.roll} already used on line {seen[rec.roll]}", line)
            seen[rec.roll] = line
            records.append(rec)
        if not records:
            raise EmptyDataset("no data rows after the header")
    except csv.Error as exc:
        raise MalformedRow(str(exc), reader.line_num, source_name) from None
    except (EmptyDataset, MalformedRow, RangeViolation, DuplicateRoll, UnknownEnumValue) as exc:
        raise exc.with_source(source_name)
    return Dataset(tuple(records), source_name)


def load_csv(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh, source_name=str(path))


def format_gpa(gpa: float) -> str:
    # shortest round-tripping repr, integral values without ".0"
    s = repr(float(gpa))
    return s[:-2] if s.endswith(".0") else s


def to_csv(ds: Dataset) -> str:
    """Canonical CSV rendering: fixed column order, Y/N flags, ``\\n`` line ends."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in ds.records:
        w.writerow([
            r.roll, format_gpa(r.gpa), r.ct, r.attendance,
            "Y" if r.assignment else "N", r.lab_per, "Y" if r.quiz else "N",
        ])
    return out.getvalue()


# -- banding ---------------------------------------------------------------

def gpa_to_band(gpa: float, spec: BandSpec = BandSpec()) -> Band:
    """Map a GPA to High/Medium/Low.

    Both thresholds are inclusive: ``gpa >= high_min`` is High and
    ``gpa <= low_max`` is Low, so a GPA sitting exactly on ``low_max``
    is Low rather than Medium.
    """
    if not (math.isfinite(gpa) and 0.0 <= gpa <= GPA_MAX):
        raise OutOfRange(f"gpa {gpa} outside [0.00, 4.00]")
    if gpa >= spec.high_min:
        return Band.HIGH
    if gpa <= spec.low_max:
        return Band.LOW
    return Band.MEDIUM


def band_counts(ds: Dataset, spec: BandSpec = BandSpec()) -> Dict[Band, int]:
    if ds is None or not len(ds):
        raise EmptyDataset("cannot count bands of an empty dataset")
    counts = {b: 0 for b in BAND_ORDER}
    for r in ds.records:
        counts[gpa_to_band(r.gpa, spec)] += 1
    return counts


# -- discretization --------------------------------------------------------

def bin_label(value: int, bins: Sequence[Tuple[int, str]]) -> str:
    for upper, label in bins:
        if value <= upper:
            return label
    raise InvalidSpec(f"value {value} exceeds the last bin bound {bins[-1][0]}")


def discretize(
    ds: Dataset,
    spec: DiscretizationSpec = DiscretizationSpec(),
    bands: BandSpec = BandSpec(),
) -> List[CategoricalRecord]:
    """Turn each record into categorical attributes plus its GPA band label."""
    if not isinstance(spec, DiscretizationSpec):
        raise InvalidSpec("discretize needs a DiscretizationSpec")
    out = []
    for r in ds.records:
        attrs = {
            "ct_band": bin_label(r.ct, spec.ct_bins),
            "attendance_band": bin_label(r.attendance, spec.attendance_bins),
            "assignment": "Y" if r.assignment else "N",
            "lab_per": r.lab_per,
            "quiz": "Y" if r.quiz else "N",
        }
        out.append(CategoricalRecord(r.roll, attrs, gpa_to_band(r.gpa, bands)))
    return out
