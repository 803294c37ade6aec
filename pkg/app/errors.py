class UsageError(ValueError):
    """Command invoked with arguments that cannot work (exit status 2)."""


class NonFiniteLossError(RuntimeError):
    """A loss term became NaN or infinite during a training step."""

    def __init__(self, term: str, step: int | None = None):
        self.term = term
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"Non-finite loss term '{term}'{where}")
