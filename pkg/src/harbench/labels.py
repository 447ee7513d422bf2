"""Activity label codes and names.

Code 0 marks unlabeled / between-activity samples; codes 1..12 are the
scripted activities recorded in the corpus.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import LabelRangeError

NULL_CODE = 0
MIN_CODE = 0
MAX_CODE = 12

ACTIVITY_NAMES = {
    1: "standing still",
    2: "sitting and relaxing",
    3: "lying down",
    4: "walking",
    5: "climbing stairs",
    6: "waist bends forward",
    7: "frontal elevation of arms",
    8: "knees bending",
    9: "cycling",
    10: "jogging",
    11: "running",
    12: "jump front & back",
}


def validate_code(code: int) -> int:
    if not MIN_CODE <= code <= MAX_CODE:
        raise LabelRangeError(f"label code {code} outside [{MIN_CODE}, {MAX_CODE}]")
    return int(code)


def label_name(code: int) -> str:
    """Human-readable name for a label code (code 0 is 'null')."""
    validate_code(code)
    return ACTIVITY_NAMES.get(int(code), "null")


@dataclass(frozen=True)
class ActivityLabel:
    """One activity-code value with its fixed name."""

    code: int

    def __post_init__(self):
        validate_code(self.code)

    @property
    def name(self) -> str:
        return label_name(self.code)

    def __int__(self) -> int:
        return self.code
