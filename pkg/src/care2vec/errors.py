"""Exception types raised across the package."""


class Care2VecError(Exception):
    """Base class for every error raised by this package."""


class MissingFile(Care2VecError, FileNotFoundError):
    pass


class SchemaMismatch(Care2VecError, ValueError):
    """The input file does not match the expected SCADI layout.

    ``row`` is the 1-based line number in the file (header is line 1) and
    ``column`` the column name, when the problem can be pinned down.
    """

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class WrongScheme(Care2VecError, ValueError):
    pass


class DimensionMismatch(Care2VecError, ValueError):
    pass


class LengthMismatch(Care2VecError, ValueError):
    pass


class NonFiniteLoss(Care2VecError, ArithmeticError):
    def __init__(self, epoch, value):
        super().__init__(f"loss became non-finite ({value}) at epoch {epoch}")
        self.epoch = epoch
        self.value = value


class InvalidDim(Care2VecError, ValueError):
    pass


class EmptyNode(Care2VecError, ValueError):
    pass


class InvalidK(Care2VecError, ValueError):
    pass


class DegenerateLabels(Care2VecError, ValueError):
    pass


class FoldError(Care2VecError):
    """A cross-validation fold failed; wraps the original exception."""

    def __init__(self, fold, cause):
        super().__init__(f"fold {fold} failed: {type(cause).__name__}: {cause}")
        self.fold = fold
        self.cause = cause


class StageError(Care2VecError):
    """A Care2Vec training stage ('autoencoder' or 'classifier') failed."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage} stage failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
