"""Exception hierarchy shared across the toolkit.

The CLI maps every ``StructMaskError`` to exit code 2 (usage / contract
violation) and anything else to exit code 1 (internal error).
"""


class StructMaskError(Exception):
    """Base class for all toolkit errors."""


class ContractError(StructMaskError):
    """A documented precondition or invariant was violated by the caller."""


class StructureParseError(StructMaskError):
    """A PDB record could not be parsed."""


class ChainNotFoundError(StructMaskError):
    """The requested chain has no usable residues."""


class AlignmentMismatchError(StructMaskError):
    """Sequence/structure alignment identity fell below the configured floor."""


class MsaFormatError(StructMaskError):
    """An alignment file is malformed (ragged rows, empty, bad characters)."""


class DmsParseError(StructMaskError):
    """A variant table row could not be parsed."""


class FileFormatError(StructMaskError):
    """A toolkit-produced file failed validation on load."""
