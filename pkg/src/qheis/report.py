"""Check reports: the result record every verifier returns.

A failing report always carries a witness (the first differing
coefficient); exponent-search checks additionally record the exponent they
found.  Serialization is deterministic: keys are emitted sorted.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class AxiomReport:
    axiom: str
    params: dict = field(default_factory=dict)
    status: str = "pass"
    witness: str = None
    exponent: int = None

    def __post_init__(self):
        if self.status not in ("pass", "fail"):
            raise ValueError("status must be 'pass' or 'fail'")
        if self.status == "fail" and not self.witness:
            raise ValueError("failing reports must carry a witness")

    @classmethod
    def from_witness(cls, axiom, params, witness, exponent=None):
        """Build a pass/fail report from an optional witness object."""
        if witness is None:
            return cls(axiom, params, "pass", None, exponent)
        return cls(axiom, params, "fail", str(witness), exponent)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        out = {
            "axiom": self.axiom,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "status": self.status,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.exponent is not None:
            out["exponent"] = self.exponent
        return out


def merge_params(base: dict, **extra) -> dict:
    out = dict(base)
    out.update(extra)
    return {k: v for k, v in out.items() if v is not None}
