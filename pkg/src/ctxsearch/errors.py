"""Exception and warning types shared across the package."""


class CtxSearchError(Exception):
    """Base class for all package errors."""


class IngestionError(CtxSearchError):
    """A dataset root is missing files or is otherwise unreadable."""


class AnnotationError(CtxSearchError):
    """A box annotation is malformed; message carries the image_id."""


class ConfigurationError(CtxSearchError):
    """An option value is outside its supported range."""


class GenerationError(CtxSearchError):
    """Synthetic data generation cannot satisfy the requested spec."""


class ProtocolError(CtxSearchError):
    """An evaluation protocol is internally inconsistent."""


class TrainingDivergenceError(CtxSearchError):
    """A loss component became non-finite during training."""


class DegenerateBoxError(CtxSearchError):
    """A box collapsed to zero area after clipping to the image."""


class DegenerateInputWarning(UserWarning):
    """A degenerate input (zero-area box, zero vector) was guarded."""


class ProtocolWarning(UserWarning):
    """A protocol constraint was relaxed (e.g. gallery enlarged to fit positives)."""
