class LprError(Exception):
    """Base class for pipeline failures that callers are expected to handle."""


class DegenerateHistogram(LprError, ValueError):
    def __init__(self):
        super().__init__("degenerate histogram")


class AlignmentLineNotFound(LprError):
    def __init__(self):
        super().__init__("alignment line not found")


class NoPlateFound(LprError):
    def __init__(self):
        super().__init__("no plate found")


class UnreadablePlate(LprError):
    def __init__(self):
        super().__init__("unreadable plate")


class DegenerateTrainingSet(LprError, ValueError):
    def __init__(self, detail=""):
        msg = "degenerate training set"
        super().__init__(f"{msg}: {detail}" if detail else msg)
