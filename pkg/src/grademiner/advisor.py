"""Instructor-facing advice: blended grades, letter grades, effort text, distributions."""
import math
import numbers
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence, Tuple

from .errors import AllZero, ConfigError, InputError, OutOfRange, UnknownLetter
from .records import GPA_MAX, StudentRecord

LAB_SCORE = {"good": 1.0, "avg": 0.5, "bad": 0.0}


@dataclass(frozen=True)
class InternalWeights:
    w_ct: float = 0.2
    w_attendance: float = 0.2
    w_assignment: float = 0.2
    w_lab: float = 0.2
    w_quiz: float = 0.2

    def __post_init__(self):
        ws = self.as_tuple()
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise ConfigError(f"weights must be non-negative, got {ws}")
        if abs(sum(ws) - 1.0) > 1e-9:
            raise ConfigError(f"weights must sum to 1, got {sum(ws)}")

    def as_tuple(self):
        return (self.w_ct, self.w_attendance, self.w_assignment, self.w_lab, self.w_quiz)


def internal_score(r: StudentRecord, w: InternalWeights = InternalWeights()) -> float:
    """Weighted in-course score in [0, 1]; every component is normalised to [0, 1] first."""
    parts = (
        r.ct / 20,
        r.attendance / 10,
        1.0 if r.assignment else 0.0,
        LAB_SCORE[r.lab_per],
        1.0 if r.quiz else 0.0,
    )
    s = sum(wi * p for wi, p in zip(w.as_tuple(), parts))
    # weights may sum to 1 +/- 1e-9
    return min(1.0, max(0.0, s))


def new_grade(external_gpa: float, internal: float, alpha: float = 0.5) -> float:
    """Blend of the previous GPA with the internal score rescaled to the 4-point scale."""
    if not 0.0 <= external_gpa <= GPA_MAX:
        raise OutOfRange(f"external gpa {external_gpa} outside [0, 4]")
    if not 0.0 <= internal <= 1.0:
        raise OutOfRange(f"internal score {internal} outside [0, 1]")
    if not 0.0 <= alpha <= 1.0:
        raise OutOfRange(f"alpha {alpha} outside [0, 1]")
    g = alpha * external_gpa + (1.0 - alpha) * GPA_MAX * internal
    return min(GPA_MAX, max(0.0, g))


BELOW_B = "below B"


@dataclass(frozen=True)
class GradeMap:
    """Letters with inclusive lower GPA bounds, best letter first."""

    entries: Tuple[Tuple[str, float], ...] = (
        ("A+", 3.75),
        ("A", 3.50),
        ("A-", 3.25),
        ("B+", 3.00),
        ("B", 2.75),
        (BELOW_B, 0.00),
    )

    def __post_init__(self):
        try:
            entries = tuple((str(l), float(m)) for l, m in self.entries)
        except (TypeError, ValueError):
            raise ConfigError("grade map entries must be (letter, min_gpa) pairs") from None
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ConfigError("grade map is empty")
        mins = [m for _, m in entries]
        if any(b >= a for a, b in zip(mins, mins[1:])):
            raise ConfigError("grade map min_gpa values must be strictly decreasing")
        if mins[0] > GPA_MAX or mins[-1] != 0.0:
            raise ConfigError("grade map must start at or below 4.00 and end at 0.00")
        letters = [l for l, _ in entries]
        if len(set(letters)) != len(letters):
            raise ConfigError("grade map letters must be distinct")

    @property
    def letters(self):
        return tuple(l for l, _ in self.entries)


def gpa_to_letter(gpa: float, grade_map: GradeMap = GradeMap()) -> str:
    if not (math.isfinite(gpa) and 0.0 <= gpa <= GPA_MAX):
        raise OutOfRange(f"gpa {gpa} outside [0, 4]")
    for letter, lo in grade_map.entries:
        if gpa >= lo:
            return letter
    raise AssertionError("grade map does not reach 0.00")


@dataclass(frozen=True)
class EffortRecommendation:
    step_id: str
    text: str


EFFORT_TEXT = {
    "S-01": "He/She is a good student. Need not to take special care.",
    "S-02": "Is not so good. Need to take care of CT & Quiz.",
    "S-03": "Is a medium student. Should take care of CT,quiz and lab performance also.",
    "S-04": (
        "Is a lower standard student. Need lot of practice of his/her lesson and also "
        "take care of all the courses ct,lab,quiz ,attendance carefully."
    ),
}
STEP_GRADES = {
    "S-01": "A+",
    "S-02": "A,A-",
    "S-03": "B+,B",
    "S-04": "Below B grade",
}
_LETTER_STEP = {"A+": "S-01", "A": "S-02", "A-": "S-02", "B+": "S-03", "B": "S-03"}


def recommend(letter: str, grade_map: GradeMap = GradeMap()) -> EffortRecommendation:
    """Effort advice for a letter grade; letters below B all share the last step."""
    if letter not in grade_map.letters:
        raise UnknownLetter(f"{letter!r} is not a letter of the grade map {grade_map.letters}")
    step = _LETTER_STEP.get(letter, "S-04")
    return EffortRecommendation(step, EFFORT_TEXT[step])


@dataclass(frozen=True)
class DistributionRow:
    label: str
    count: int
    percentage: Decimal


@dataclass(frozen=True)
class DistributionTable:
    rows: Tuple[DistributionRow, ...]

    @property
    def counts(self):
        return tuple(r.count for r in self.rows)

    @property
    def percentages(self):
        return tuple(float(r.percentage) for r in self.rows)

    @property
    def total(self):
        return sum(self.counts)

    def to_list(self):
        return [
            {"class": r.label, "count": r.count, "percentage": float(r.percentage)}
            for r in self.rows
        ]


_CENT = Decimal("0.01")


def percent(count: int, total: int) -> Decimal:
    """``100 * count / total`` rounded half-up to two decimals, computed exactly."""
    return (Decimal(100 * count) / Decimal(total)).quantize(_CENT, rounding=ROUND_HALF_UP)


def band_distribution(counts: Sequence[Tuple[str, int]]) -> DistributionTable:
    """Counts with their share of the total, each rounded half-up to 0.01%."""
    pairs = []
    for label, c in counts:
        if isinstance(c, bool) or not isinstance(c, numbers.Integral) or c < 0:
            raise InputError(f"count for {label!r} must be a non-negative integer, got {c!r}")
        pairs.append((str(label), int(c)))
    total = sum(c for _, c in pairs)
    if total == 0:
        raise AllZero("distribution needs at least one positive count")
    return DistributionTable(tuple(DistributionRow(l, c, percent(c, total)) for l, c in pairs))
