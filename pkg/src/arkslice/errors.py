"""Exception hierarchy shared by every arkslice module."""


class ArksliceError(Exception):
    """Base class for all errors raised by this package."""


# --- PID grammar ---

class MalformedPid(ArksliceError):
    """The PID string does not match the grammar."""


class InvalidRange(ArksliceError):
    """A range term has reversed or non-integer bounds."""


class DuplicateName(ArksliceError):
    """A sensor or measurement name is repeated within one PID."""


class BadNaan(ArksliceError):
    """The NAAN component is not a nonempty decimal-digit string."""


class InvariantViolation(ArksliceError):
    """A PidQuery handed to the serializer breaks a structural invariant."""


# --- timeseries store ---

class IoError(ArksliceError):
    """A sensor file could not be read."""


class DuplicateTimestamp(ArksliceError):
    """Two rows share the same timestamp key."""


class NonIntegerTimestamp(ArksliceError):
    """A timestamp cell is not an integer."""


class RaggedRow(ArksliceError):
    """A data row's field count differs from the header's."""


class EmptyFile(ArksliceError):
    """The sensor file has no header line."""


class UnknownSensor(ArksliceError):
    """A requested sensor does not exist in the dataset."""


class UnknownMeasurement(ArksliceError):
    """A requested measurement does not exist in a sensor table."""


# --- type registry ---

class EmptyColumn(ArksliceError):
    """No numeric values remain after filtering."""


# --- catalog ---

class DuplicateDataset(ArksliceError):
    """Dataset name already registered under a different source."""


class LoadError(ArksliceError):
    """Dataset registration failed while loading sensor files."""


class NotFound(ArksliceError):
    """No catalog entry (or binding) for the requested name."""


# --- resolver ---

class UnknownNaan(ArksliceError):
    """The resolver is not configured to serve this NAAN."""


class InvalidTarget(ArksliceError):
    """A mint target is empty or neither a URL nor a parseable PID."""


class PersistenceError(ArksliceError):
    """The mint log could not be written."""


class TooFewRows(ArksliceError):
    """Fewer timestamps than folds requested."""
