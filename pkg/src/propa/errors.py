"""Exception types shared across the package."""


class Rejection(ValueError):
    """A mathematical precondition failed (CLI exit code 2)."""


class SizeBoundExceeded(Rejection):
    """An instance is larger than a configured bound."""

    def __init__(self, what, size, bound):
        self.what = what
        self.size = size
        self.bound = bound
        super().__init__(f"{what} has size {size}, above the configured bound {bound}")
