"""Exception types shared across the engine."""


class ModelError(ValueError):
    """A network is structurally unusable (cycle, non-total map, bad payload)."""


class UnsupportedShapeError(ModelError):
    """The operation needs a single discrete driver feeding every Choose selector."""


class EvidenceError(ValueError):
    """Evidence names an unknown node or state, or is otherwise malformed."""


class InconsistentEvidenceError(EvidenceError):
    """The observed state combination has zero probability under the model."""


class UndefinedPosteriorError(ValueError):
    """Every state assigns zero density to the observed value."""
