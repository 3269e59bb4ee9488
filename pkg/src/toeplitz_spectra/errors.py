class NumericalFailure(RuntimeError):
    """A solver step failed (no sign change, unwrap too coarse, ...).

    ``diagnostics`` carries whatever trace the failing step collected, so the
    CLI can dump it as JSON.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
