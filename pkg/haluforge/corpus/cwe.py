"""CWE category table."""

from enum import Enum
from typing import Dict

from ..core.errors import UnknownCweError


class CweCategory(str, Enum):
    MEMORY_SAFETY = "MemorySafety"
    INPUT_VALIDATION = "InputValidation"
    CONCURRENCY_ISSUE = "ConcurrencyIssue"
    SECURITY_HANDLING = "SecurityHandling"


_GROUPS = {
    CweCategory.MEMORY_SAFETY: (
        119, 125, 131, 190, 191, 415, 416, 475, 665, 787, 824, 908),
    CweCategory.INPUT_VALIDATION: (
        20, 22, 59, 79, 88, 113, 134, 200, 203, 287, 288, 346, 427, 444),
    CweCategory.CONCURRENCY_ISSUE: (
        276, 362, 400, 617, 662, 668, 674, 703, 770),
    CweCategory.SECURITY_HANDLING: (
        248, 252, 347, 670, 682, 701, 754, 755, 758),
}

CWE_CATEGORIES: Dict[str, CweCategory] = {
    f"CWE-{number}": category
    for category, numbers in _GROUPS.items() for number in numbers
}


def _normalize(cwe_id: str) -> str:
    prefix, _, number = cwe_id.strip().partition("-")
    if prefix.upper() != "CWE" or not number.isdigit():
        return cwe_id
    return f"CWE-{int(number)}"


def categorize_cwe(cwe_id: str) -> CweCategory:
    """Category of a CWE id; `CWE-020` and `CWE-20` are the same id.

    Raises:
        UnknownCweError: id outside the table
    """
    category = CWE_CATEGORIES.get(_normalize(cwe_id))
    if category is None:
        raise UnknownCweError(cwe_id)
    return category
