"""Rule-based validation for records, settings and prompt text."""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from .errors import ValidationError

Predicate = Callable[[Any], bool]


@dataclass
class ValidationRule:
    """A named predicate and the message reported when it fails."""
    name: str
    check: Predicate
    message: str
    details: Optional[Dict[str, Any]] = None

    def failure(self, data: Any) -> Optional[Dict[str, Any]]:
        """The error record for `data`, or None when the rule holds.

        A check that raises counts as failed.
        """
        try:
            if self.check(data):
                return None
            message, details = self.message, self.details
        except Exception as e:
            message, details = f"Validation check failed: {e}", {"error": str(e)}
        return {"rule": self.name, "message": message, "details": details}


class Validator:
    """Runs every rule and reports all failures at once."""

    def __init__(self):
        self.rules: Dict[str, ValidationRule] = {}
        self._validation_errors: List[Dict[str, Any]] = []

    def add_rule(self, rule: ValidationRule) -> None:
        self.rules[rule.name] = rule

    def validate(self, data: Any) -> bool:
        """Check `data` against all rules.

        Raises:
            ValidationError: one or more rules failed; `details["errors"]`
                lists them in rule order
        """
        failures = [rule.failure(data) for rule in self.rules.values()]
        self._validation_errors = [f for f in failures if f is not None]
        if self._validation_errors:
            summary = "; ".join(f["message"] for f in self._validation_errors)
            raise ValidationError(f"Validation failed: {summary}",
                                  details={"errors": self._validation_errors})
        return True

    @property
    def errors(self) -> List[Dict[str, Any]]:
        return list(self._validation_errors)


class TextValidator(Validator):
    """Prompt and report text must carry something besides whitespace."""

    def __init__(self):
        super().__init__()
        self.add_rule(ValidationRule(
            name="not_empty",
            check=lambda x: isinstance(x, str) and bool(x.strip()),
            message="Text cannot be empty"
        ))


class FieldValidator(Validator):
    """Attribute constraints on a record or config object.

    `constraints` maps attribute names to (predicate, message) pairs.
    """

    def __init__(self, constraints: Mapping[str, Tuple[Predicate, str]]):
        super().__init__()
        for key, (predicate, message) in constraints.items():
            self.add_rule(ValidationRule(
                name=f"field_{key}",
                check=lambda x, k=key, f=predicate: f(getattr(x, k)),
                message=f"Field '{key}' {message}",
                details={"field": key}
            ))


def first_failure(error: ValidationError) -> Tuple[str, str]:
    """(field or rule name, message) of the first failed rule in `error`."""
    failed = error.details["errors"][0]
    field = (failed.get("details") or {}).get("field", failed["rule"])
    return field, failed["message"]


def positive(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


def non_negative(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value >= 0
