"""Shared result types and serialization helpers."""

from dataclasses import dataclass

LOWER_ESTIMATE_OF_SUP = "lower_estimate_of_sup"
UPPER_BOUND_OF_INF = "upper_bound_of_inf"


@dataclass(frozen=True)
class ConstantEstimate:
    """A sampled geometric constant with its sidedness.

    ``sidedness`` records whether the value under-estimates a supremum or
    over-estimates an infimum, so downstream comparisons stay one-sided.
    """

    value: float
    samples: int
    seed: int
    sidedness: str = LOWER_ESTIMATE_OF_SUP
    skipped: int = 0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constant estimates are nonnegative")


def round12(x):
    """Round a float to 12 significant digits (report canonical form)."""
    if isinstance(x, float):
        return float(format(x, ".12g"))
    return x


def _json_scalar(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v != v:
            return '"nan"'
        if v == float("inf"):
            return '"inf"'
        if v == float("-inf"):
            return '"-inf"'
        return format(v, ".12g")
    if isinstance(v, str):
        import json

        return json.dumps(v)
    raise TypeError(f"unsupported scalar type {type(v)!r}")


def dumps_canonical(obj) -> str:
    """Serialize to JSON with floats at 12 significant digits.

    Dict insertion order is preserved; output is byte-deterministic for a
    fixed input structure. Non-finite floats become the strings "inf"/"nan".
    """
    if isinstance(obj, dict):
        items = ", ".join(
            f"{_json_scalar(str(k))}: {dumps_canonical(v)}" for k, v in obj.items()
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps_canonical(v) for v in obj) + "]"
    return _json_scalar(obj)


def format_cell(v) -> str:
    """CSV cell formatting matching the JSON float convention."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v != v:
            return "nan"
        if v == float("inf"):
            return "inf"
        if v == float("-inf"):
            return "-inf"
        return format(v, ".12g")
    return str(v)
