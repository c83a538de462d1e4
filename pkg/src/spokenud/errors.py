"""Exception types raised by the conversion toolkit."""

from dataclasses import dataclass


class SpokenUDError(ValueError):
    """Base class for all data and configuration errors."""


class EafError(SpokenUDError):
    pass


class MetadataError(SpokenUDError):
    pass


class TableError(SpokenUDError):
    """Malformed normalization table, lexicon or language annotation file."""


class SegmentationError(SpokenUDError):
    pass


class TemplateError(SpokenUDError):
    pass


class EmitError(SpokenUDError):
    pass


class ConlluParseError(SpokenUDError):
    def __init__(self, message, file=None, line=None):
        self.file = file
        self.line = line
        where = ""
        if file is not None:
            where = f"{file}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SampleError(SpokenUDError):
    pass


@dataclass(frozen=True)
class Notice:
    """A non-fatal finding produced while converting (not a CoNLL-U lint)."""

    code: str
    message: str
    where: str = ""

    def __str__(self):
        return f"{self.where}: {self.message}" if self.where else self.message
