"""ID3 induction over categorical attributes, classification and JSON export."""
import json
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .errors import (
    AllZeroCounts,
    EmptyTrainingSet,
    InputError,
    MissingAttribute,
    UnknownAttribute,
)
from .records import BAND_ORDER, Band, CategoricalRecord

# gains closer than this are ties; a best gain at or below it counts as zero
GAIN_TOL = 1e-12


@dataclass(frozen=True)
class Leaf:
    label: Band


@dataclass(frozen=True)
class Internal:
    attribute: str
    branches: Mapping[str, "TreeNode"]
    fallback_class: Band

    def __post_init__(self):
        if not self.branches:
            raise InputError("an internal node needs at least one branch")
        object.__setattr__(self, "branches", dict(sorted(self.branches.items())))


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TrainingView:
    records: Tuple[CategoricalRecord, ...]
    attributes: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        for r in self.records:
            for a in self.attributes:
                if a not in r.attributes:
                    raise MissingAttribute(f"record {r.roll} lacks attribute {a!r}")

    @classmethod
    def from_records(cls, records: Sequence[CategoricalRecord], attributes=None):
        records = tuple(records)
        if attributes is None:
            attributes = tuple(records[0].attributes) if records else ()
        return cls(records, tuple(attributes))


def _class_index(label) -> int:
    return BAND_ORDER.index(Band(label))


def entropy(class_counts) -> float:
    """Base-2 Shannon entropy of a class histogram (mapping or sequence of counts)."""
    counts = list(class_counts.values()) if isinstance(class_counts, Mapping) else list(class_counts)
    if any(c < 0 for c in counts):
        raise InputError("class counts must be non-negative")
    return _entropy_row(np.asarray(counts, dtype=np.int64))


def _entropy_row(counts: np.ndarray) -> float:
    total = int(counts.sum())
    if total <= 0:
        raise AllZeroCounts("entropy needs at least one positive count")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    # a single class gives -1*log2(1) = -0.0
    return h + 0.0


def _encode(view: TrainingView, attribute: str):
    values = sorted({r.attributes[attribute] for r in view.records})
    index = {v: i for i, v in enumerate(values)}
    codes = np.fromiter((index[r.attributes[attribute]] for r in view.records),
                        dtype=np.int64, count=len(view.records))
    return values, codes


def _class_codes(view: TrainingView) -> np.ndarray:
    return np.fromiter((_class_index(r.class_label) for r in view.records),
                       dtype=np.int64, count=len(view.records))


def _class_counts(view: TrainingView) -> np.ndarray:
    return np.bincount(_class_codes(view), minlength=len(BAND_ORDER))


def _gain_from_table(table: np.ndarray, parent_h: float) -> float:
    n = table.sum()
    rem = 0.0
    for row in table:
        size = row.sum()
        if size:
            rem += (size / n) * _entropy_row(row)
    return parent_h - rem


def information_gain(view: TrainingView, attribute: str) -> float:
    """Parent entropy minus the size-weighted entropy of each value's subset."""
    if attribute not in view.attributes:
        raise UnknownAttribute(f"attribute {attribute!r} is not in the view")
    if not view.records:
        raise EmptyTrainingSet("information gain of an empty view")
    classes = _class_codes(view)
    values, codes = _encode(view, attribute)
    table = _kernels.contingency(codes, classes, len(values), len(BAND_ORDER))
    parent = _entropy_row(np.bincount(classes, minlength=len(BAND_ORDER)))
    return _gain_from_table(table, parent)


def majority_class(records: Sequence[CategoricalRecord]) -> Band:
    """Most common class; equal counts resolve High, then Medium, then Low."""
    counts = np.zeros(len(BAND_ORDER), dtype=np.int64)
    for r in records:
        counts[_class_index(r.class_label)] += 1
    if counts.sum() == 0:
        raise EmptyTrainingSet("majority class of no records")
    return BAND_ORDER[int(np.argmax(counts))]


def best_attribute(view: TrainingView) -> Tuple[str, float]:
    """Highest-gain attribute, earliest in ``view.attributes`` among ties."""
    best, best_gain = None, -math.inf
    for a in view.attributes:
        g = information_gain(view, a)
        if g > best_gain + GAIN_TOL:
            best, best_gain = a, g
    return best, best_gain


def contradictory(view: TrainingView) -> bool:
    """True if two records agree on every view attribute but differ in class."""
    seen = {}
    for r in view.records:
        key = tuple(r.attributes[a] for a in view.attributes)
        if seen.setdefault(key, r.class_label) != r.class_label:
            return True
    return False


def build_tree(view: TrainingView) -> TreeNode:
    """Grow a tree top-down by greedy information-gain splits.

    Recursion stops at a pure subset (leaf of that class), when no
    attributes remain, or when the best gain is zero and the subset holds
    records no remaining attribute can tell apart; the last two give a
    majority leaf.  A zero-gain subset that is still separable is split on
    the earliest attribute, so XOR-like patterns are learned.  Branches
    exist only for values present in the node's subset, so no child subset
    is ever empty.
    """
    if not view.records:
        raise EmptyTrainingSet("cannot build a tree from no records")
    counts = _class_counts(view)
    if np.count_nonzero(counts) == 1:
        return Leaf(BAND_ORDER[int(np.argmax(counts))])
    majority = BAND_ORDER[int(np.argmax(counts))]
    if not view.attributes:
        return Leaf(majority)
    attr, gain = best_attribute(view)
    if gain <= GAIN_TOL and contradictory(view):
        return Leaf(majority)
    remaining = tuple(a for a in view.attributes if a != attr)
    subsets: Dict[str, List[CategoricalRecord]] = {}
    for r in view.records:
        subsets.setdefault(r.attributes[attr], []).append(r)
    branches = {
        value: build_tree(TrainingView(tuple(subset), remaining))
        for value, subset in sorted(subsets.items())
    }
    return Internal(attr, branches, majority)


def classify(tree: TreeNode, record: Union[CategoricalRecord, Mapping[str, str]]) -> Band:
    attrs = record.attributes if isinstance(record, CategoricalRecord) else record
    node = tree
    while isinstance(node, Internal):
        if node.attribute not in attrs:
            raise MissingAttribute(f"record lacks attribute {node.attribute!r}")
        child = node.branches.get(attrs[node.attribute])
        if child is None:
            return node.fallback_class
        node = child
    return node.label


def depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.branches.values())


def paths(tree: TreeNode, prefix=()):
    """Yield the tuple of attributes tested along every root-to-leaf path."""
    if isinstance(tree, Leaf):
        yield prefix
        return
    for child in tree.branches.values():
        yield from paths(child, prefix + (tree.attribute,))


# -- serialization -----------------------------------------------------------

def tree_to_dict(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"class": tree.label.value}
    return {
        "attribute": tree.attribute,
        "fallback": tree.fallback_class.value,
        "branches": {v: tree_to_dict(c) for v, c in sorted(tree.branches.items())},
    }


def tree_from_dict(obj) -> TreeNode:
    if not isinstance(obj, dict):
        raise InputError(f"tree node must be an object, got {type(obj).__name__}")
    try:
        if set(obj) == {"class"}:
            return Leaf(Band(obj["class"]))
        if set(obj) == {"attribute", "fallback", "branches"}:
            if not isinstance(obj["branches"], dict):
                raise InputError("branches must be an object")
            return Internal(
                str(obj["attribute"]),
                {str(v): tree_from_dict(c) for v, c in obj["branches"].items()},
                Band(obj["fallback"]),
            )
    except ValueError as exc:
        raise InputError(f"bad tree node: {exc}") from None
    raise InputError(f"unrecognised tree node keys: {sorted(obj)}")


def export_tree(tree: TreeNode) -> str:
    """Compact JSON; branches sorted by value, so output is deterministic."""
    return json.dumps(tree_to_dict(tree), separators=(",", ":"), ensure_ascii=False)


def import_tree(text: str) -> TreeNode:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"tree is not valid JSON: {exc}") from None
    return tree_from_dict(obj)
